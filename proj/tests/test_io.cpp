#include <doctest.h>

#include <nlohmann/json.hpp>

#include <sstream>

#include "langmem/csv.hpp"
#include "langmem/error.hpp"
#include "langmem/lang_space.hpp"
#include "langmem/similarity.hpp"
#include "langmem/simgraph.hpp"

using namespace langmem;

TEST_CASE("csv primitives") {
  CHECK(csv::split_line("a, \"b,c\" ,d") == csv::Row{"a", "b,c", "d"});
  CHECK(csv::split_line("\"say \"\"hi\"\"\"") == csv::Row{"say \"hi\""});
  CHECK(csv::escape("a,b") == "\"a,b\"");
  CHECK(csv::join({"RM (B) Intra", "x,y"}) == "RM (B) Intra,\"x,y\"");
  CHECK(csv::parse_double(" 2.5 ", "v") == 2.5);
  CHECK_THROWS_AS(csv::parse_double("2.5x", "v"), Error);
  CHECK_THROWS_AS(csv::parse_double("", "v"), Error);
  CHECK(csv::format_number(-0.0) == "0.000000");
  CHECK(csv::format_number(1.0 / 3.0, 2) == "0.33");
  std::istringstream in("a,b\r\n\r\n1,2\n");
  CHECK(csv::read_all(in).size() == 2);
}

TEST_CASE("similarity csv") {
  std::istringstream plain("en,de,fr\n1,0.5,0.2\n0.5,1,0.3\n0.2,0.3,1\n");
  const auto s = read_similarity_csv(plain);
  CHECK(s.languages == std::vector<std::string>{"en", "de", "fr"});
  CHECK(s.values(1, 2) == 0.3);
  CHECK(s.index_of("fr") == 2u);
  CHECK(!s.index_of("xx"));

  std::istringstream labelled(",en,de\nen,1,0.5\nde,0.5,1\n");
  CHECK(read_similarity_csv(labelled).values(0, 1) == 0.5);

  std::ostringstream out;
  write_similarity_csv(out, s);
  std::istringstream back(out.str());
  CHECK(read_similarity_csv(back).values.isApprox(s.values));

  std::istringstream asym("a,b\n1,0.5\n0.4,1\n");
  CHECK_THROWS_AS(read_similarity_csv(asym), Error);
  std::istringstream diag("a,b\n0.9,0.5\n0.5,1\n");
  CHECK_THROWS_AS(read_similarity_csv(diag), Error);
  std::istringstream range("a,b\n1,1.5\n1.5,1\n");
  CHECK_THROWS_AS(read_similarity_csv(range), Error);
  std::istringstream ragged("a,b\n1,0.5\n0.5\n");
  CHECK_THROWS_AS(read_similarity_csv(ragged), Error);
  std::istringstream dup("a,a\n1,0.5\n0.5,1\n");
  CHECK_THROWS_AS(read_similarity_csv(dup), Error);
}

TEST_CASE("embeddings jsonl") {
  std::istringstream in(
      R"({"language":"en","layer":2,"dim":2,"vector":[1,0]}
{"language":"de","layer":2,"dim":2,"vector":[0,1]}
{"language":"fr","layer":1,"dim":2,"sentence_id":"s1","vector":[2,2]}
{"language":"fr","layer":1,"dim":2,"sentence_id":"s2","vector":[4,0]}
{"language":"fr","layer":1,"dim":2,"sentence_id":"s2","vector":[4,0]}
)");
  const auto layers = lang_space::read_embeddings_jsonl(in);
  REQUIRE(layers.size() == 2);
  CHECK(layers.at(2).languages == std::vector<std::string>{"en", "de"});
  // a repeated sentence counts twice in the mean
  CHECK(layers.at(1).means.col(0).isApprox(Eigen::Vector2d(10.0 / 3.0, 2.0 / 3.0)));

  std::ostringstream out;
  lang_space::write_embeddings_jsonl(out, layers);
  std::istringstream back(out.str());
  CHECK(lang_space::read_embeddings_jsonl(back).at(2).means == layers.at(2).means);

  std::istringstream wrong_dim(R"({"language":"en","layer":0,"dim":3,"vector":[1,0]})");
  CHECK_THROWS_AS(lang_space::read_embeddings_jsonl(wrong_dim), Error);
  std::istringstream dup(R"({"language":"en","layer":0,"dim":1,"vector":[1]}
{"language":"en","layer":0,"dim":1,"vector":[2]})");
  CHECK_THROWS_AS(lang_space::read_embeddings_jsonl(dup), Error);
  std::istringstream nan(R"({"language":"en","layer":0,"dim":1,"vector":[null]})");
  CHECK_THROWS_AS(lang_space::read_embeddings_jsonl(nan), Error);
}

TEST_CASE("sentence order does not change the mean") {
  std::istringstream a(
      R"({"language":"en","layer":0,"dim":2,"sentence_id":"1","vector":[0.1,0.7]}
{"language":"en","layer":0,"dim":2,"sentence_id":"2","vector":[0.3,-0.2]}
{"language":"en","layer":0,"dim":2,"sentence_id":"3","vector":[0.9,0.4]}
)");
  std::istringstream b(
      R"({"language":"en","layer":0,"dim":2,"sentence_id":"3","vector":[0.9,0.4]}
{"language":"en","layer":0,"dim":2,"sentence_id":"1","vector":[0.1,0.7]}
{"language":"en","layer":0,"dim":2,"sentence_id":"2","vector":[0.3,-0.2]}
)");
  const auto ma = lang_space::read_embeddings_jsonl(a).at(0).means;
  const auto mb = lang_space::read_embeddings_jsonl(b).at(0).means;
  CHECK((ma - mb).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("graph json") {
  std::istringstream in("a,b,c\n1,0.6,0.2\n0.6,1,0.5\n0.2,0.5,1\n");
  const auto g = simgraph::build_graph(read_similarity_csv(in), 0.5);
  std::ostringstream out;
  simgraph::write_graph_json(out, g);
  const auto j = nlohmann::json::parse(out.str());
  CHECK(j["theta"] == 0.5);
  CHECK(j["edges"].size() == 2);
  CHECK(j["languages"][2] == "c");
}

TEST_CASE("errors carry context") {
  try {
    load_similarity_csv("/nonexistent/sim.csv");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
    CHECK(std::string(e.what()).find("/nonexistent/sim.csv") != std::string::npos);
  }
  const Error base(ErrorCode::ParseError, "bad number");
  const auto wrapped = base.with_context("file.csv line 3");
  CHECK(wrapped.code() == ErrorCode::ParseError);
  CHECK(std::string(wrapped.what()).find("file.csv line 3") != std::string::npos);
  CHECK(std::string(wrapped.what()).find("bad number") != std::string::npos);
}
