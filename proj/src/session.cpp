#include <algorithm>
#include <array>
#include <set>

#include <fmt/format.h>

#include "voxshop/shop.hpp"

namespace voxshop::shop {
namespace {

using command::CommandDecision;
using command::KeywordSpot;
using command::Outcome;

constexpr std::int64_t kMaxLineQuantity = 99;

// Filler words dropped from product references and search queries before
// scoring. Pronouns point at whatever product is in focus.
const std::set<std::string, std::less<>> kFiller = {
    "a",    "an",   "the",  "some", "my",    "your", "please", "of",   "for",  "me",
    "to",   "about", "more", "and", "with",  "in",   "on",     "any",  "i",    "want",
    "like", "would", "can",  "you", "could", "just", "item",   "product", "thanks", "now"};
const std::set<std::string, std::less<>> kPronouns = {"it", "this", "that", "these", "those", "them", "one"};

TokenSeq content_words(const TokenSeq& tokens) {
  TokenSeq out;
  for (const auto& t : tokens) {
    if (kFiller.count(t) == 0) out.push_back(t);
  }
  return out;
}

TokenSeq without_pronouns(const TokenSeq& tokens) {
  TokenSeq out;
  for (const auto& t : tokens) {
    if (kPronouns.count(t) == 0) out.push_back(t);
  }
  return out;
}

const command::SlotValue* slot(const KeywordSpot& spot, std::string_view name) {
  auto it = spot.slot_values.find(std::string(name));
  return it == spot.slot_values.end() ? nullptr : &it->second;
}

TokenSeq slot_tokens(const KeywordSpot& spot, std::string_view name) {
  const auto* v = slot(spot, name);
  return v ? v->tokens : TokenSeq{};
}

std::optional<std::int64_t> slot_number(const KeywordSpot& spot, std::string_view name) {
  const auto* v = slot(spot, name);
  return v ? v->number : std::nullopt;
}

enum class RefKind { kFound, kNotFound, kAmbiguous, kNeedContext };

struct Resolution {
  RefKind kind = RefKind::kNotFound;
  const Product* product = nullptr;
  std::vector<const Product*> candidates;
  std::string phrase;
};

// Unique best-scoring product among `pool`, or the tied set.
Resolution best_of(const std::vector<const Product*>& pool, const TokenSeq& words) {
  Resolution r;
  int best = 0;
  for (const Product* p : pool) {
    int score = relevance(*p, words);
    if (score <= 0) continue;
    if (score > best) {
      best = score;
      r.candidates.clear();
    }
    if (score == best) r.candidates.push_back(p);
  }
  if (r.candidates.empty()) {
    r.kind = RefKind::kNotFound;
  } else if (r.candidates.size() == 1) {
    r.kind = RefKind::kFound;
    r.product = r.candidates.front();
  } else {
    r.kind = RefKind::kAmbiguous;
  }
  return r;
}

const Product* focused_product(const Session& s, const Catalog& catalog) {
  if (const auto* detail = std::get_if<page::ProductDetail>(&s.page)) return catalog.find(detail->product_id);
  if (const auto* results = std::get_if<page::SearchResults>(&s.page)) {
    if (results->result_ids.size() == 1) return catalog.find(results->result_ids.front());
  }
  return nullptr;
}

// Current page first (the shown results or the open product), then the
// whole catalog.
Resolution resolve_product(const Session& s, const TokenSeq& ref, const Catalog& catalog) {
  TokenSeq words = without_pronouns(content_words(ref));
  Resolution r;
  r.phrase = textnorm::join(words);
  if (words.empty()) {
    if (const Product* p = focused_product(s, catalog)) {
      r.kind = RefKind::kFound;
      r.product = p;
    } else {
      r.kind = RefKind::kNeedContext;
    }
    return r;
  }

  std::vector<const Product*> on_page;
  if (const auto* results = std::get_if<page::SearchResults>(&s.page)) {
    for (const auto& id : results->result_ids) {
      if (const Product* p = catalog.find(id)) on_page.push_back(p);
    }
  } else if (const auto* detail = std::get_if<page::ProductDetail>(&s.page)) {
    if (const Product* p = catalog.find(detail->product_id)) on_page.push_back(p);
  }
  Resolution local = best_of(on_page, words);
  if (local.kind != RefKind::kNotFound) {
    local.phrase = r.phrase;
    return local;
  }

  std::vector<const Product*> all;
  for (const auto& p : catalog.products()) all.push_back(&p);
  Resolution global = best_of(all, words);
  global.phrase = r.phrase;
  return global;
}

// Resolution restricted to products already in the cart.
Resolution resolve_cart_line(const Session& s, const TokenSeq& ref, const Catalog& catalog) {
  TokenSeq words = without_pronouns(content_words(ref));
  Resolution r;
  r.phrase = textnorm::join(words);
  if (words.empty()) {
    const Product* focus = focused_product(s, catalog);
    if (focus && s.cart.find(focus->id)) {
      r.kind = RefKind::kFound;
      r.product = focus;
    } else if (s.cart.lines().size() == 1) {
      r.kind = RefKind::kFound;
      r.product = catalog.find(s.cart.lines().front().product_id);
      if (r.product == nullptr) r.kind = RefKind::kNotFound;
    } else {
      r.kind = RefKind::kNeedContext;
    }
    return r;
  }
  std::vector<const Product*> pool;
  for (const auto& line : s.cart.lines()) {
    if (const Product* p = catalog.find(line.product_id)) pool.push_back(p);
  }
  Resolution found = best_of(pool, words);
  found.phrase = r.phrase;
  return found;
}

std::string disambiguation_speech(const Resolution& r) {
  std::string names;
  std::size_t shown = std::min<std::size_t>(r.candidates.size(), 3);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i > 0) names += i + 1 == shown ? " or " : ", ";
    names += r.candidates[i]->title;
  }
  return fmt::format("More than one product matches \"{}\". Did you mean {}? Please say the product name.",
                     r.phrase, names);
}

std::string unresolved_speech(const Resolution& r, std::string_view need_context) {
  switch (r.kind) {
    case RefKind::kAmbiguous: return disambiguation_speech(r);
    case RefKind::kNeedContext: return std::string(need_context);
    case RefKind::kNotFound:
    case RefKind::kFound: break;
  }
  return fmt::format("I couldn't find a product matching \"{}\".", r.phrase);
}

std::string quantity_phrase(std::int64_t quantity, const std::string& title) {
  return quantity == 1 ? title : fmt::format("{} of {}", quantity, title);
}

std::string cart_summary_speech(const Cart& cart) {
  if (cart.empty()) return "Your cart is empty.";
  std::string out = fmt::format("You have {} item{} in your cart:", cart.item_count(),
                                cart.item_count() == 1 ? "" : "s");
  for (std::size_t i = 0; i < cart.lines().size(); ++i) {
    const CartLine& l = cart.lines()[i];
    out += fmt::format(" {}{} at {} each{}", i == 0 ? "" : "", quantity_phrase(l.quantity, l.title),
                       format_price(l.unit_price_minor), i + 1 == cart.lines().size() ? "." : ";");
  }
  out += fmt::format(" Total {}.", format_price(cart.total_minor()));
  return out;
}

std::string product_speech(const Product& p) {
  return fmt::format("{}, {}. {}", p.title, format_price(p.price_minor),
                     p.in_stock ? "In stock." : "Currently out of stock.");
}

class Transition {
 public:
  Transition(const Session& session, const Catalog& catalog) : s_(session), catalog_(catalog) {}

  ApplyResult run(const CommandDecision& decision) {
    if (decision.outcome != Outcome::kMatched || !decision.spot) {
      speech_ = decision.speech_fallback.value_or("Sorry, I didn't understand that.");
      return finish();
    }
    const KeywordSpot& spot = *decision.spot;
    const std::string& intent = spot.intent;
    if (intent == "search") search(spot);
    else if (intent == "select") select(spot);
    else if (intent == "add_to_cart") add_to_cart(spot);
    else if (intent == "remove_from_cart") remove_from_cart(spot);
    else if (intent == "quantity") set_quantity(spot);
    else if (intent == "show_cart") show_cart();
    else if (intent == "checkout") checkout();
    else if (intent == "confirm") confirm();
    else if (intent == "cancel") cancel();
    else if (intent == "go_back") go_back();
    else if (intent == "next_page") turn_page(+1);
    else if (intent == "previous_page") turn_page(-1);
    else if (intent == "describe") describe(spot);
    else if (intent == "help") help();
    else speech_ = fmt::format("I heard \"{}\", but that isn't something this shop can do.", decision.utterance);
    return finish();
  }

 private:
  void navigate(Page next) {
    if (next == s_.page) return;
    if (s_.history.empty() || s_.history.back() != s_.page) s_.history.push_back(s_.page);
    s_.page = std::move(next);
  }

  void show_results(const TokenSeq& query, std::size_t page_index) {
    SearchPage results = shop::search(catalog_, query, page_index);
    page::SearchResults next{query, page_index, {}, results.total};
    for (const auto& item : results.items) next.result_ids.push_back(item.product->id);
    navigate(std::move(next));

    std::string q = textnorm::join(query);
    if (results.total == 0) {
      speech_ = fmt::format("I couldn't find any products matching \"{}\".", q);
      return;
    }
    std::size_t first = page_index * results.page_size + 1;
    speech_ = fmt::format("Found {} result{} for \"{}\".", results.total, results.total == 1 ? "" : "s", q);
    if (page_index > 0 || results.has_next()) {
      speech_ += fmt::format(" Showing {} to {}.", first, first + results.items.size() - 1);
    }
    for (std::size_t i = 0; i < results.items.size(); ++i) {
      const Product& p = *results.items[i].product;
      speech_ += fmt::format(" {}: {}, {}.", i + 1, p.title, format_price(p.price_minor));
    }
    if (results.has_next()) speech_ += " Say next page for more.";
  }

  void search(const KeywordSpot& spot) {
    TokenSeq query = content_words(slot_tokens(spot, "query"));
    if (query.empty()) {
      speech_ = "What would you like to search for?";
      return;
    }
    show_results(query, 0);
  }

  void select(const KeywordSpot& spot) {
    if (auto position = slot_number(spot, "position")) {
      const auto* results = std::get_if<page::SearchResults>(&s_.page);
      if (results == nullptr) {
        speech_ = "There is no result list to choose from. Search for something first.";
        return;
      }
      if (*position < 1 || static_cast<std::size_t>(*position) > results->result_ids.size()) {
        speech_ = fmt::format("There {} only {} result{} on this page.",
                              results->result_ids.size() == 1 ? "is" : "are", results->result_ids.size(),
                              results->result_ids.size() == 1 ? "" : "s");
        return;
      }
      open(*catalog_.find(results->result_ids[static_cast<std::size_t>(*position - 1)]));
      return;
    }
    Resolution r = resolve_product(s_, slot_tokens(spot, "product"), catalog_);
    if (r.kind != RefKind::kFound) {
      speech_ = unresolved_speech(r, "Which product would you like to open?");
      return;
    }
    open(*r.product);
  }

  void open(const Product& p) {
    navigate(page::ProductDetail{p.id});
    speech_ = product_speech(p) + " Say add to cart to buy it.";
  }

  void add_to_cart(const KeywordSpot& spot) {
    Resolution r = resolve_product(s_, slot_tokens(spot, "product"), catalog_);
    if (r.kind != RefKind::kFound) {
      speech_ = unresolved_speech(r, "Which product would you like to add?");
      return;
    }
    const Product& p = *r.product;
    std::int64_t quantity = slot_number(spot, "quantity").value_or(1);
    if (quantity < 1) {
      speech_ = "How many would you like to add?";
      return;
    }
    if (!p.in_stock) {
      speech_ = fmt::format("Sorry, {} is out of stock.", p.title);
      return;
    }
    const CartLine* existing = s_.cart.find(p.id);
    if ((existing ? existing->quantity : 0) + quantity > kMaxLineQuantity) {
      speech_ = fmt::format("You can have at most {} of one item in your cart.", kMaxLineQuantity);
      return;
    }
    s_.cart.add(p, quantity);
    speech_ = fmt::format("Added {} to your cart. Your cart total is {}.", quantity_phrase(quantity, p.title),
                          format_price(s_.cart.total_minor()));
  }

  void remove_from_cart(const KeywordSpot& spot) {
    if (s_.cart.empty()) {
      speech_ = "Your cart is already empty.";
      return;
    }
    Resolution r = resolve_cart_line(s_, slot_tokens(spot, "product"), catalog_);
    if (r.kind != RefKind::kFound) {
      if (r.kind == RefKind::kNotFound) {
        speech_ = fmt::format("Nothing in your cart matches \"{}\".", r.phrase);
      } else {
        speech_ = unresolved_speech(r, "Which item would you like to remove?");
      }
      return;
    }
    s_.cart.remove(r.product->id);
    speech_ = fmt::format("Removed {} from your cart. Your cart total is {}.", r.product->title,
                          format_price(s_.cart.total_minor()));
  }

  void set_quantity(const KeywordSpot& spot) {
    auto quantity = slot_number(spot, "quantity");
    if (!quantity) {
      speech_ = "What quantity would you like?";
      return;
    }
    if (s_.cart.empty()) {
      speech_ = "Your cart is empty.";
      return;
    }
    Resolution r = resolve_cart_line(s_, slot_tokens(spot, "product"), catalog_);
    if (r.kind != RefKind::kFound) {
      if (r.kind == RefKind::kNotFound) {
        speech_ = fmt::format("Nothing in your cart matches \"{}\".", r.phrase);
      } else {
        speech_ = unresolved_speech(r, "Which item should I change?");
      }
      return;
    }
    if (*quantity > kMaxLineQuantity) {
      speech_ = fmt::format("You can have at most {} of one item in your cart.", kMaxLineQuantity);
      return;
    }
    s_.cart.set_quantity(r.product->id, *quantity);
    if (*quantity == 0) {
      speech_ = fmt::format("Removed {} from your cart. Your cart total is {}.", r.product->title,
                            format_price(s_.cart.total_minor()));
    } else {
      speech_ = fmt::format("Set {} to {}. Your cart total is {}.", r.product->title, *quantity,
                            format_price(s_.cart.total_minor()));
    }
  }

  void show_cart() {
    navigate(page::CartView{});
    speech_ = cart_summary_speech(s_.cart);
    if (!s_.cart.empty()) speech_ += " Say checkout when you are ready.";
  }

  void checkout() {
    if (s_.cart.empty()) {
      speech_ = "Your cart is empty. Add something before checking out.";
      return;
    }
    navigate(page::CheckoutConfirm{});
    speech_ = fmt::format("Your order comes to {} for {} item{}. Say confirm to place the order, or cancel.",
                          format_price(s_.cart.total_minor()), s_.cart.item_count(),
                          s_.cart.item_count() == 1 ? "" : "s");
  }

  void confirm() {
    if (!std::holds_alternative<page::CheckoutConfirm>(s_.page)) {
      speech_ = "There is nothing to confirm. Say checkout to start your order.";
      return;
    }
    if (s_.cart.empty()) {
      speech_ = "Your cart is empty, so there is nothing to order.";
      return;
    }
    ++s_.orders_placed;
    page::OrderPlaced placed{fmt::format("order-{}", s_.orders_placed), s_.cart.total_minor()};
    speech_ = fmt::format("Thank you! Order {} for {} has been placed.", placed.order_id,
                          format_price(placed.total_minor));
    s_.cart.clear();
    s_.page = std::move(placed);
    s_.history.clear();
  }

  void cancel() {
    if (!std::holds_alternative<page::CheckoutConfirm>(s_.page)) {
      speech_ = "There is nothing to cancel.";
      return;
    }
    pop_history();
    speech_ = "Checkout cancelled. " + where_am_i();
  }

  void go_back() {
    if (s_.history.empty()) {
      speech_ = "There is no previous page.";
      return;
    }
    pop_history();
    speech_ = "Going back. " + where_am_i();
  }

  void pop_history() {
    if (s_.history.empty()) {
      s_.page = page::Home{};
      return;
    }
    s_.page = std::move(s_.history.back());
    s_.history.pop_back();
  }

  std::string where_am_i() const {
    return std::visit(
        [&](const auto& p) -> std::string {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, page::Home>) {
            return "You are on the home page.";
          } else if constexpr (std::is_same_v<T, page::SearchResults>) {
            return fmt::format("You are viewing results for \"{}\".", textnorm::join(p.query));
          } else if constexpr (std::is_same_v<T, page::ProductDetail>) {
            const Product* prod = catalog_.find(p.product_id);
            return fmt::format("You are viewing {}.", prod ? prod->title : p.product_id);
          } else if constexpr (std::is_same_v<T, page::CartView>) {
            return "You are viewing your cart.";
          } else if constexpr (std::is_same_v<T, page::CheckoutConfirm>) {
            return "You are at checkout.";
          } else {
            return fmt::format("Your order {} is placed.", p.order_id);
          }
        },
        s_.page);
  }

  void turn_page(int direction) {
    const auto* results = std::get_if<page::SearchResults>(&s_.page);
    if (results == nullptr) {
      speech_ = "Page turning only works on search results.";
      return;
    }
    if (direction < 0 && results->page_index == 0) {
      speech_ = "You are already on the first page of results.";
      return;
    }
    std::size_t next = direction < 0 ? results->page_index - 1 : results->page_index + 1;
    if (direction > 0 && next * kDefaultPageSize >= results->total) {
      speech_ = "There are no more results.";
      return;
    }
    TokenSeq query = results->query;
    show_results(query, next);
  }

  void describe(const KeywordSpot& spot) {
    TokenSeq ref = slot_tokens(spot, "product");
    if (without_pronouns(content_words(ref)).empty()) {
      if (const auto* results = std::get_if<page::SearchResults>(&s_.page); results && results->result_ids.size() > 1) {
        speech_ = fmt::format("Results for \"{}\":", textnorm::join(results->query));
        for (std::size_t i = 0; i < results->result_ids.size(); ++i) {
          const Product* p = catalog_.find(results->result_ids[i]);
          speech_ += fmt::format(" {}: {}, {}.", i + 1, p->title, format_price(p->price_minor));
        }
        return;
      }
    }
    Resolution r = resolve_product(s_, ref, catalog_);
    if (r.kind != RefKind::kFound) {
      speech_ = unresolved_speech(r, "Which product would you like to hear about?");
      return;
    }
    speech_ = product_speech(*r.product) + " " + r.product->description;
  }

  void help() {
    std::string list;
    auto intents = available_intents(s_.page);
    for (std::size_t i = 0; i < intents.size(); ++i) {
      if (i > 0) list += i + 1 == intents.size() ? ", or " : ", ";
      std::string name(intents[i]);
      std::replace(name.begin(), name.end(), '_', ' ');
      list += name;
    }
    speech_ = fmt::format("{} You can say: {}.", where_am_i(), list);
  }

  ApplyResult finish() {
    if (speech_.empty()) speech_ = "Okay.";
    return {s_, {speech_, display_for(s_, catalog_)}};
  }

  Session s_;
  const Catalog& catalog_;
  std::string speech_;
};

}  // namespace

std::string_view page_kind(const Page& p) {
  static constexpr std::array<std::string_view, 6> kNames = {
      "HOME", "SEARCH_RESULTS", "PRODUCT_DETAIL", "CART_VIEW", "CHECKOUT_CONFIRM", "ORDER_PLACED"};
  return kNames[p.index()];
}

std::vector<std::string_view> available_intents(const Page& p) {
  std::vector<std::string_view> intents = {"search"};
  if (std::holds_alternative<page::SearchResults>(p)) {
    intents.insert(intents.end(), {"select", "describe", "add_to_cart", "next_page", "previous_page"});
  } else if (std::holds_alternative<page::ProductDetail>(p)) {
    intents.insert(intents.end(), {"describe", "add_to_cart"});
  } else if (std::holds_alternative<page::CartView>(p)) {
    intents.insert(intents.end(), {"remove_from_cart", "quantity", "checkout"});
  } else if (std::holds_alternative<page::CheckoutConfirm>(p)) {
    intents.insert(intents.end(), {"confirm", "cancel", "remove_from_cart", "quantity"});
  }
  intents.insert(intents.end(), {"show_cart", "go_back", "help"});
  return intents;
}

Display display_for(const Session& session, const Catalog& catalog) {
  Display display{std::string(page_kind(session.page)), to_json(session.page)};
  auto& payload = display.payload;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, page::SearchResults>) {
          payload["results"] = to_json(shop::search(catalog, p.query, p.page_index))["results"];
        } else if constexpr (std::is_same_v<T, page::ProductDetail>) {
          if (const Product* prod = catalog.find(p.product_id)) payload["product"] = to_json(*prod);
        } else if constexpr (std::is_same_v<T, page::CartView> || std::is_same_v<T, page::CheckoutConfirm>) {
          payload["cart"] = to_json(session.cart);
        }
      },
      session.page);
  return display;
}

ApplyResult apply(const Session& session, const CommandDecision& decision, const Catalog& catalog) {
  return Transition(session, catalog).run(decision);
}

nlohmann::ordered_json to_json(const Page& p) {
  nlohmann::ordered_json j = {{"kind", page_kind(p)}};
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, page::SearchResults>) {
          j["query"] = textnorm::join(v.query);
          j["page"] = v.page_index;
          j["total"] = v.total;
          j["result_ids"] = v.result_ids;
        } else if constexpr (std::is_same_v<T, page::ProductDetail>) {
          j["product_id"] = v.product_id;
        } else if constexpr (std::is_same_v<T, page::OrderPlaced>) {
          j["order_id"] = v.order_id;
          j["total_minor"] = v.total_minor;
        }
      },
      p);
  return j;
}

nlohmann::ordered_json to_json(const SpeechResponse& response) {
  return {{"speech", response.speech},
          {"display", {{"page", response.display.page}, {"payload", response.display.payload}}}};
}

}  // namespace voxshop::shop
