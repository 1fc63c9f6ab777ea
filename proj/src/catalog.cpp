#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "voxshop/error.hpp"
#include "voxshop/json_util.hpp"
#include "voxshop/shop.hpp"

namespace voxshop::shop {
namespace {

int count_hits(const std::set<std::string>& query, const TokenSeq& field) {
  int hits = 0;
  for (const auto& q : query) {
    if (std::find(field.begin(), field.end(), q) != field.end()) ++hits;
  }
  return hits;
}

}  // namespace

Catalog Catalog::from_json(const nlohmann::json& doc) {
  using namespace json_util;
  require_array(doc, "$");
  Catalog catalog;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string path = fmt::format("$[{}]", i);
    const auto& j = require_object(doc[i], path);
    Product p;
    p.id = get_string(j, "id", path);
    if (p.id.empty()) schema_error(path + ".id", "must not be empty");
    p.title = get_string(j, "title", path);
    p.category = get_string(j, "category", path);
    p.price_minor = get_integer(j, "price_minor", path);
    if (p.price_minor < 0) schema_error(path + ".price_minor", "must be >= 0");
    p.description = get_string(j, "description", path);
    p.image_ref = get_string(j, "image_ref", path);
    p.in_stock = get_bool(j, "in_stock", path);
    if (!seen.insert(p.id).second) {
      throw Error(ErrorCode::kConflict, fmt::format("{}: duplicate product id '{}'", path, p.id));
    }
    p.title_tokens = textnorm::normalize(p.title);
    p.category_tokens = textnorm::normalize(p.category);
    p.description_tokens = textnorm::normalize(p.description);
    catalog.products_.push_back(std::move(p));
  }
  std::sort(catalog.products_.begin(), catalog.products_.end(),
            [](const Product& a, const Product& b) { return a.id < b.id; });
  return catalog;
}

Catalog Catalog::load(const std::filesystem::path& path) {
  return from_json(json_util::parse_file(path));
}

const Product* Catalog::find(std::string_view id) const {
  auto it = std::lower_bound(products_.begin(), products_.end(), id,
                             [](const Product& p, std::string_view v) { return p.id < v; });
  if (it == products_.end() || it->id != id) return nullptr;
  return &*it;
}

int relevance(const Product& product, const TokenSeq& query) {
  std::set<std::string> distinct(query.begin(), query.end());
  return 2 * count_hits(distinct, product.title_tokens) + count_hits(distinct, product.category_tokens) +
         count_hits(distinct, product.description_tokens);
}

std::vector<ScoredProduct> rank(const Catalog& catalog, const TokenSeq& query) {
  std::vector<ScoredProduct> ranked;
  for (const auto& p : catalog.products()) {
    int score = relevance(p, query);
    if (score > 0) ranked.push_back({&p, score});
  }
  // Catalog order is already by id, so a stable sort on score keeps id ties.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const ScoredProduct& a, const ScoredProduct& b) { return a.score > b.score; });
  return ranked;
}

SearchPage search(const Catalog& catalog, const TokenSeq& query, std::size_t page, std::size_t page_size) {
  if (page_size == 0) throw Error(ErrorCode::kContractViolation, "page_size must be at least 1");
  auto ranked = rank(catalog, query);
  SearchPage result;
  result.query = query;
  result.page = page;
  result.page_size = page_size;
  result.total = ranked.size();
  if (page < (ranked.size() + page_size - 1) / page_size) {
    std::size_t first = page * page_size;
    std::size_t last = std::min(first + page_size, ranked.size());
    result.items.assign(ranked.begin() + static_cast<std::ptrdiff_t>(first),
                        ranked.begin() + static_cast<std::ptrdiff_t>(last));
  }
  return result;
}

std::string format_price(std::int64_t minor) {
  return fmt::format("${}.{:02}", minor / 100, minor % 100);
}

std::int64_t Cart::item_count() const {
  std::int64_t n = 0;
  for (const auto& l : lines_) n += l.quantity;
  return n;
}

const CartLine* Cart::find(std::string_view product_id) const {
  for (const auto& l : lines_) {
    if (l.product_id == product_id) return &l;
  }
  return nullptr;
}

void Cart::add(const Product& product, std::int64_t quantity) {
  if (quantity < 1) throw Error(ErrorCode::kContractViolation, "cart quantity must be at least 1");
  auto it = std::find_if(lines_.begin(), lines_.end(),
                         [&](const CartLine& l) { return l.product_id == product.id; });
  if (it != lines_.end()) {
    it->quantity += quantity;
  } else {
    lines_.push_back({product.id, product.title, product.price_minor, quantity});
  }
  recompute();
}

void Cart::set_quantity(std::string_view product_id, std::int64_t quantity) {
  if (quantity < 0) throw Error(ErrorCode::kContractViolation, "cart quantity must not be negative");
  if (quantity == 0) {
    remove(product_id);
    return;
  }
  for (auto& l : lines_) {
    if (l.product_id == product_id) l.quantity = quantity;
  }
  recompute();
}

bool Cart::remove(std::string_view product_id) {
  auto it = std::find_if(lines_.begin(), lines_.end(),
                         [&](const CartLine& l) { return l.product_id == product_id; });
  if (it == lines_.end()) return false;
  lines_.erase(it);
  recompute();
  return true;
}

void Cart::clear() {
  lines_.clear();
  total_minor_ = 0;
}

void Cart::recompute() {
  total_minor_ = 0;
  for (const auto& l : lines_) total_minor_ += l.quantity * l.unit_price_minor;
}

nlohmann::ordered_json to_json(const Product& p) {
  return {{"id", p.id},
          {"title", p.title},
          {"category", p.category},
          {"price_minor", p.price_minor},
          {"description", p.description},
          {"image_ref", p.image_ref},
          {"in_stock", p.in_stock}};
}

nlohmann::ordered_json to_json(const Cart& cart) {
  auto lines = nlohmann::ordered_json::array();
  for (const auto& l : cart.lines()) {
    lines.push_back({{"product_id", l.product_id},
                     {"title", l.title},
                     {"unit_price_minor", l.unit_price_minor},
                     {"quantity", l.quantity},
                     {"line_total_minor", l.unit_price_minor * l.quantity}});
  }
  return {{"lines", std::move(lines)}, {"item_count", cart.item_count()}, {"total_minor", cart.total_minor()}};
}

nlohmann::ordered_json to_json(const SearchPage& page) {
  auto items = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < page.items.size(); ++i) {
    const Product& p = *page.items[i].product;
    items.push_back({{"position", i + 1},
                     {"id", p.id},
                     {"title", p.title},
                     {"price_minor", p.price_minor},
                     {"in_stock", p.in_stock},
                     {"score", page.items[i].score}});
  }
  return {{"query", textnorm::join(page.query)},
          {"page", page.page},
          {"page_size", page.page_size},
          {"total", page.total},
          {"results", std::move(items)}};
}

}  // namespace voxshop::shop
