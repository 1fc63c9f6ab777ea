#include <doctest.h>

#include <random>
#include <set>

#include "voxshop/error.hpp"
#include "voxshop/shop.hpp"

using namespace voxshop;
using namespace voxshop::shop;
using command::CommandDecision;
using command::Outcome;
using nlohmann::json;
using textnorm::normalize;

namespace {

const Catalog& catalog() {
  static const Catalog c = Catalog::load(std::string(VOXSHOP_DATA_DIR) + "/catalog.json");
  return c;
}

const command::CommandGrammar& grammar() {
  static const auto g = command::load_grammar(std::string(VOXSHOP_DATA_DIR) + "/shop_grammar.json");
  return g;
}

CommandDecision decide(const std::string& text) {
  return command::interpret(normalize(text), {}, grammar());
}

// Folds utterances through apply, returning the final result.
ApplyResult say(Session& s, const std::string& text) {
  ApplyResult r = apply(s, decide(text), catalog());
  s = r.session;
  return r;
}

// Independent cart oracle: direct summation over the lines against the
// catalog's prices.
std::int64_t summed_total(const Cart& cart) {
  std::int64_t total = 0;
  for (const auto& line : cart.lines()) total += line.quantity * catalog().find(line.product_id)->price_minor;
  return total;
}

bool cart_consistent(const Cart& cart) {
  std::set<std::string> ids;
  for (const auto& line : cart.lines()) {
    if (line.quantity < 1 || !ids.insert(line.product_id).second) return false;
  }
  return cart.total_minor() == summed_total(cart);
}

ErrorCode error_code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

json product_json(const std::string& id, const std::string& title, std::int64_t price) {
  return {{"id", id},          {"title", title},         {"category", "Misc"}, {"price_minor", price},
          {"description", ""}, {"image_ref", "img.jpg"}, {"in_stock", true}};
}

}  // namespace

TEST_CASE("catalog loading") {
  SUBCASE("valid products") {
    auto c = Catalog::from_json(json::array({product_json("p2", "Two", 200), product_json("p1", "One", 100)}));
    CHECK(c.size() == 2);
    CHECK(c.products()[0].id == "p1");
    CHECK(c.find("p2")->title == "Two");
    CHECK(c.find("p3") == nullptr);
  }
  SUBCASE("duplicate id is a conflict") {
    CHECK(error_code_of([] {
            Catalog::from_json(json::array({product_json("p1", "One", 100), product_json("p1", "Uno", 100)}));
          }) == ErrorCode::kConflict);
  }
  SUBCASE("schema errors name the path") {
    json bad = json::array({product_json("p1", "One", 100), product_json("p2", "Two", -1)});
    try {
      Catalog::from_json(bad);
      FAIL("expected schema error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kSchema);
      CHECK(std::string(e.what()).find("$[1].price_minor") != std::string::npos);
    }
    json missing = json::array({product_json("p1", "One", 100)});
    missing[0].erase("title");
    CHECK(error_code_of([&] { Catalog::from_json(missing); }) == ErrorCode::kSchema);
    CHECK(error_code_of([] { Catalog::from_json(json::object()); }) == ErrorCode::kSchema);
    CHECK(error_code_of([] { Catalog::load("/nonexistent/catalog.json"); }) == ErrorCode::kIo);
  }
  SUBCASE("shipped catalog") {
    CHECK(catalog().size() >= 20);
  }
}

TEST_CASE("search ranking") {
  auto c = Catalog::from_json(json::array({
      product_json("p2", "Blue Hat", 100),
      product_json("p1", "Blue Scarf", 100),
      product_json("p3", "Red Shoes", 100),
  }));
  SUBCASE("title match ranks first") {
    auto page = search(c, {"red", "shoes"}, 0);
    REQUIRE(page.items.size() == 1);
    CHECK(page.items[0].product->id == "p3");
    CHECK(page.items[0].score == 4);
  }
  SUBCASE("ties by id") {
    auto page = search(c, {"blue"}, 0);
    REQUIRE(page.items.size() == 2);
    CHECK(page.items[0].product->id == "p1");
    CHECK(page.items[1].product->id == "p2");
  }
  SUBCASE("zero score excluded, repeated query tokens count once") {
    CHECK(search(c, {"green"}, 0).total == 0);
    CHECK(relevance(*c.find("p3"), {"red", "red"}) == 2);
  }
  SUBCASE("pagination") {
    auto page = search(catalog(), {"red", "shoes"}, 0);
    CHECK(page.total == 11);
    CHECK(page.items.size() == 5);
    CHECK(page.has_next());
    CHECK(page.items[0].product->id == "p001");
    auto last = search(catalog(), {"red", "shoes"}, 2);
    CHECK(last.items.size() == 1);
    CHECK(!last.has_next());
    CHECK(search(catalog(), {"red", "shoes"}, 9).items.empty());
    CHECK(error_code_of([] { search(catalog(), {"red"}, 0, 0); }) == ErrorCode::kContractViolation);
  }
  SUBCASE("category and description weights") {
    json p = product_json("x", "Thing", 1);
    p["category"] = "Gadget";
    p["description"] = "A gadget thing";
    auto one = Catalog::from_json(json::array({p}));
    CHECK(relevance(one.products()[0], {"thing"}) == 3);
    CHECK(relevance(one.products()[0], {"gadget"}) == 2);
  }
}

TEST_CASE("cart") {
  Cart cart;
  const Product& shoes = *catalog().find("p001");
  const Product& socks = *catalog().find("p008");
  cart.add(shoes, 1);
  cart.add(socks, 2);
  cart.add(shoes, 1);
  CHECK(cart.lines().size() == 2);
  CHECK(cart.find("p001")->quantity == 2);
  CHECK(cart.total_minor() == summed_total(cart));
  CHECK(cart.item_count() == 4);
  cart.set_quantity("p008", 5);
  CHECK(cart.total_minor() == summed_total(cart));
  cart.set_quantity("p008", 0);
  CHECK(cart.find("p008") == nullptr);
  CHECK(!cart.remove("p008"));
  CHECK(cart.remove("p001"));
  CHECK(cart.empty());
  CHECK(cart.total_minor() == 0);
  CHECK(error_code_of([&] { cart.add(shoes, 0); }) == ErrorCode::kContractViolation);
  CHECK(format_price(5999) == "$59.99");
  CHECK(format_price(5) == "$0.05");
}

TEST_CASE("apply: search, paging, select") {
  Session s;
  auto r = say(s, "search for red shoes");
  REQUIRE(std::holds_alternative<page::SearchResults>(s.page));
  const auto& results = std::get<page::SearchResults>(s.page);
  CHECK(results.query == std::vector<std::string>{"red", "shoes"});
  CHECK(results.result_ids.size() == 5);
  CHECK(r.response.display.page == "SEARCH_RESULTS");
  CHECK(r.response.display.payload["results"].size() == 5);
  CHECK(r.response.speech.find("Found 11 results") != std::string::npos);
  CHECK(s.history.size() == 1);

  say(s, "next page");
  CHECK(std::get<page::SearchResults>(s.page).page_index == 1);
  say(s, "next page");
  CHECK(std::get<page::SearchResults>(s.page).page_index == 2);
  Session before = s;
  r = say(s, "next page");
  CHECK(s == before);
  CHECK(r.response.speech == "There are no more results.");
  say(s, "previous page");
  say(s, "previous page");
  CHECK(std::get<page::SearchResults>(s.page).page_index == 0);

  say(s, "select the second one");
  REQUIRE(std::holds_alternative<page::ProductDetail>(s.page));
  CHECK(std::get<page::ProductDetail>(s.page).product_id == "p002");

  say(s, "go back");
  CHECK(std::holds_alternative<page::SearchResults>(s.page));
  r = say(s, "open the red one");  // two products on this page score equally
  CHECK(std::holds_alternative<page::SearchResults>(s.page));
  CHECK(r.response.speech.find("Did you mean") != std::string::npos);
  r = say(s, "open the red running shoes");
  CHECK(std::get<page::ProductDetail>(s.page).product_id == "p001");
  CHECK(r.response.display.payload["product"]["id"] == "p001");

  before = s;
  r = say(s, "select the ninth one");
  CHECK(s == before);
}

TEST_CASE("apply: add twice merges into one line") {
  Session s;
  say(s, "search for red shoes");
  say(s, "add the red running shoes to my cart");
  say(s, "add the red running shoes to my cart");
  REQUIRE(s.cart.lines().size() == 1);
  CHECK(s.cart.lines()[0].quantity == 2);
  CHECK(s.cart.total_minor() == 2 * catalog().find("p001")->price_minor);
  CHECK(s.cart.total_minor() == summed_total(s.cart));
}

TEST_CASE("apply: product resolution") {
  Session s;
  SUBCASE("pronoun without focus asks") {
    auto r = say(s, "add it to my cart");
    CHECK(s.cart.empty());
    CHECK(r.response.speech.find("Which product") != std::string::npos);
  }
  SUBCASE("ambiguous reference leaves state unchanged") {
    say(s, "search for red shoes");
    Session before = s;
    auto r = say(s, "add the red one to my cart");
    CHECK(s == before);
    CHECK(r.response.speech.find("Did you mean") != std::string::npos);
  }
  SUBCASE("whole catalog when the page has no match") {
    say(s, "search for kettle");
    say(s, "add the coffee maker to my cart");
    REQUIRE(s.cart.lines().size() == 1);
    CHECK(s.cart.lines()[0].product_id == "p016");
  }
  SUBCASE("out of stock is refused") {
    auto r = say(s, "add red rain boots to my cart");
    CHECK(s.cart.empty());
    CHECK(r.response.speech.find("out of stock") != std::string::npos);
  }
  SUBCASE("quantity slot") {
    say(s, "add three yoga mats to my cart");
    REQUIRE(s.cart.lines().size() == 1);
    CHECK(s.cart.lines()[0].product_id == "p019");
    CHECK(s.cart.lines()[0].quantity == 3);
    auto r = say(s, "add 99 yoga mats to my cart");
    CHECK(s.cart.lines()[0].quantity == 3);
    CHECK(r.response.speech.find("at most") != std::string::npos);
  }
}

TEST_CASE("apply: cart, checkout, confirm, cancel") {
  Session s;
  auto r = say(s, "checkout");
  CHECK(std::holds_alternative<page::Home>(s.page));
  CHECK(r.response.speech.find("empty") != std::string::npos);

  say(s, "add the coffee maker to my cart");
  say(s, "add the chef knife to my cart");
  say(s, "show my cart");
  CHECK(std::holds_alternative<page::CartView>(s.page));
  say(s, "set the quantity of chef knife to 4");
  CHECK(s.cart.find("p017")->quantity == 4);
  CHECK(cart_consistent(s.cart));
  say(s, "remove the coffee maker from my cart");
  CHECK(s.cart.find("p016") == nullptr);
  CHECK(cart_consistent(s.cart));

  say(s, "checkout");
  CHECK(std::holds_alternative<page::CheckoutConfirm>(s.page));
  say(s, "cancel");
  CHECK(std::holds_alternative<page::CartView>(s.page));
  say(s, "checkout");
  std::int64_t total = s.cart.total_minor();
  r = say(s, "confirm my order");
  REQUIRE(std::holds_alternative<page::OrderPlaced>(s.page));
  CHECK(std::get<page::OrderPlaced>(s.page).order_id == "order-1");
  CHECK(std::get<page::OrderPlaced>(s.page).total_minor == total);
  CHECK(s.cart.empty());
  CHECK(s.history.empty());
  CHECK(r.response.display.payload["order_id"] == "order-1");

  r = say(s, "confirm");
  CHECK(std::holds_alternative<page::OrderPlaced>(s.page));
  r = say(s, "cancel");
  CHECK(r.response.speech == "There is nothing to cancel.");
}

TEST_CASE("apply: fallbacks leave state unchanged") {
  Session s;
  say(s, "search for red shoes");
  Session before = s;
  auto r = say(s, "um hello is this working");
  CHECK(s == before);
  CHECK(r.response.speech.find("couldn't find a command") != std::string::npos);

  auto tokens = normalize("add it to my cart");
  auto low = command::interpret(tokens, std::vector<Rational>(tokens.size(), Rational(3, 10)), grammar());
  REQUIRE(low.outcome == Outcome::kLowConfidence);
  r = apply(s, low, catalog());
  CHECK(r.session == before);
  CHECK(r.response.speech == *low.speech_fallback);
}

TEST_CASE("apply: help and history") {
  Session s;
  auto r = say(s, "help");
  CHECK(r.response.speech.find("search") != std::string::npos);
  CHECK(r.response.speech.find("checkout") == std::string::npos);
  r = say(s, "go back");
  CHECK(r.response.speech == "There is no previous page.");
  say(s, "show my cart");
  say(s, "show my cart");
  CHECK(s.history.size() == 1);
  r = say(s, "help");
  CHECK(r.response.speech.find("checkout") != std::string::npos);
  CHECK(available_intents(page::CheckoutConfirm{}).size() > available_intents(page::Home{}).size());
}

TEST_CASE("apply is pure and serializes deterministically") {
  Session s;
  say(s, "search for red shoes");
  auto d = decide("add the red running shoes to my cart");
  auto a = apply(s, d, catalog());
  auto b = apply(s, d, catalog());
  CHECK(a.session == b.session);
  CHECK(to_json(a.response).dump() == to_json(b.response).dump());
  CHECK(to_json(a.session.page).dump() == to_json(b.session.page).dump());
}

TEST_CASE("property: random utterances never silence speech or corrupt the cart") {
  std::vector<std::string> vocab = {"add", "it", "to", "my", "cart", "the", "red", "shoes", "search", "for",
                                    "show", "checkout", "confirm", "cancel", "go", "back", "next", "page",
                                    "previous", "select", "first", "second", "two", "three", "remove", "from",
                                    "set", "quantity", "of", "coffee", "maker", "socks", "help", "describe",
                                    "um", "yes", "0", "99", "make", "running", "kettle", "tell", "me", "more"};
  std::mt19937 rng(4242);
  std::uniform_int_distribution<std::size_t> len(0, 9);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::uniform_int_distribution<int> conf(0, 10);
  Session s;
  for (int step = 0; step < 3000; ++step) {
    std::vector<std::string> tokens(len(rng));
    for (auto& t : tokens) t = vocab[pick(rng)];
    std::vector<Rational> c(tokens.size());
    for (auto& x : c) x = Rational(conf(rng), 10);
    auto d = command::interpret(tokens, c, grammar());
    auto r = apply(s, d, catalog());
    REQUIRE(!r.response.speech.empty());
    REQUIRE(cart_consistent(r.session.cart));
    if (d.outcome != Outcome::kMatched) REQUIRE(r.session == s);
    s = r.session;
    if (step % 500 == 499) s = Session{};
  }
}
