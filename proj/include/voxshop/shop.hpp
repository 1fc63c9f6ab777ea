#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "voxshop/command.hpp"
#include "voxshop/textnorm.hpp"

namespace voxshop::shop {

using textnorm::TokenSeq;

struct Product {
  std::string id;
  std::string title;
  std::string category;
  std::int64_t price_minor = 0;
  std::string description;
  std::string image_ref;
  bool in_stock = true;

  TokenSeq title_tokens;
  TokenSeq category_tokens;
  TokenSeq description_tokens;
};

/// Immutable product list, ordered by id.
class Catalog {
 public:
  /// Validates a JSON array of products. Malformed entries are schema errors
  /// naming the path; a repeated id is a conflict error.
  static Catalog from_json(const nlohmann::json& doc);
  static Catalog load(const std::filesystem::path& path);

  const Product* find(std::string_view id) const;
  const std::vector<Product>& products() const { return products_; }
  std::size_t size() const { return products_.size(); }

 private:
  std::vector<Product> products_;
};

/// 2 points per query token found in the title, 1 per token found in the
/// category, 1 per token found in the description. Repeated query tokens
/// count once.
int relevance(const Product& product, const TokenSeq& query);

struct ScoredProduct {
  const Product* product = nullptr;
  int score = 0;
};

/// All products with a positive score, best first, ties by ascending id.
std::vector<ScoredProduct> rank(const Catalog& catalog, const TokenSeq& query);

struct SearchPage {
  TokenSeq query;
  std::size_t page = 0;
  std::size_t page_size = 0;
  std::size_t total = 0;
  std::vector<ScoredProduct> items;

  bool has_next() const { return (page + 1) * page_size < total; }
};

inline constexpr std::size_t kDefaultPageSize = 5;

SearchPage search(const Catalog& catalog, const TokenSeq& query, std::size_t page,
                  std::size_t page_size = kDefaultPageSize);

std::string format_price(std::int64_t minor);

struct CartLine {
  std::string product_id;
  std::string title;
  std::int64_t unit_price_minor = 0;
  std::int64_t quantity = 1;

  bool operator==(const CartLine&) const = default;
};

class Cart {
 public:
  const std::vector<CartLine>& lines() const { return lines_; }
  std::int64_t total_minor() const { return total_minor_; }
  std::int64_t item_count() const;
  bool empty() const { return lines_.empty(); }

  const CartLine* find(std::string_view product_id) const;

  /// Adds to an existing line for the product or appends a new one.
  void add(const Product& product, std::int64_t quantity);
  /// Quantity 0 removes the line.
  void set_quantity(std::string_view product_id, std::int64_t quantity);
  bool remove(std::string_view product_id);
  void clear();

  bool operator==(const Cart&) const = default;

 private:
  void recompute();

  std::vector<CartLine> lines_;
  std::int64_t total_minor_ = 0;
};

namespace page {
struct Home {
  bool operator==(const Home&) const = default;
};
struct SearchResults {
  TokenSeq query;
  std::size_t page_index = 0;
  std::vector<std::string> result_ids;  // ids shown on this page, in order
  std::size_t total = 0;
  bool operator==(const SearchResults&) const = default;
};
struct ProductDetail {
  std::string product_id;
  bool operator==(const ProductDetail&) const = default;
};
struct CartView {
  bool operator==(const CartView&) const = default;
};
struct CheckoutConfirm {
  bool operator==(const CheckoutConfirm&) const = default;
};
struct OrderPlaced {
  std::string order_id;
  std::int64_t total_minor = 0;
  bool operator==(const OrderPlaced&) const = default;
};
}  // namespace page

using Page = std::variant<page::Home, page::SearchResults, page::ProductDetail, page::CartView,
                          page::CheckoutConfirm, page::OrderPlaced>;

std::string_view page_kind(const Page& p);

struct Session {
  std::string id;
  Page page = page::Home{};
  Cart cart;
  std::vector<Page> history;               // prior pages, most recent last
  std::optional<std::int64_t> event_seq;   // last processed event
  std::int64_t orders_placed = 0;

  bool operator==(const Session&) const = default;
};

struct Display {
  std::string page;                 // page kind to render
  nlohmann::ordered_json payload;   // page-specific data
};

struct SpeechResponse {
  std::string speech;
  Display display;
};

struct ApplyResult {
  Session session;
  SpeechResponse response;
};

/// One state-machine step. NO_MATCH and LOW_CONFIDENCE decisions leave the
/// session untouched and speak the decision's fallback text.
ApplyResult apply(const Session& session, const command::CommandDecision& decision, const Catalog& catalog);

/// What the client should render for the session's current page.
Display display_for(const Session& session, const Catalog& catalog);

/// Intents that do something on the given page, in help order.
std::vector<std::string_view> available_intents(const Page& p);

nlohmann::ordered_json to_json(const Product& product);
nlohmann::ordered_json to_json(const Cart& cart);
nlohmann::ordered_json to_json(const Page& p);
nlohmann::ordered_json to_json(const SpeechResponse& response);
nlohmann::ordered_json to_json(const SearchPage& page);

}  // namespace voxshop::shop
