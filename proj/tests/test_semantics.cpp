#include <doctest.h>

#include "spgnn/errors.hpp"
#include "spgnn/semantics.hpp"
#include "test_util.hpp"

using namespace spgnn;

TEST_SUITE_BEGIN("semantics");

TEST_CASE("load_embeddings parses tokens and dimensions") {
  testutil::TempDir dir("emb");
  testutil::write_text(dir.path() / "e.txt",
                       "bar 1.0 2.0 3.0 4.0\n"
                       "line 0.5 0.5 0.5 0.5\n"
                       "pie -1.0 0.0 1.0 2.0\n");
  const auto loaded = load_embeddings(dir.path() / "e.txt");
  CHECK(loaded.table.dim == 4);
  CHECK(loaded.table.entries.size() == 3);
  CHECK(loaded.duplicate_count == 0);
  CHECK(loaded.table.entries.at("bar")[2] == 3.0);
}

TEST_CASE("load_embeddings error paths") {
  testutil::TempDir dir("emb2");
  SUBCASE("inconsistent dimension names the line") {
    testutil::write_text(dir.path() / "bad.txt",
                         "bar 1.0 2.0 3.0 4.0\n"
                         "line 0.5 0.5 0.5\n");
    try {
      load_embeddings(dir.path() / "bad.txt");
      FAIL("expected InconsistentDimension");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InconsistentDimension);
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
  }
  SUBCASE("empty file") {
    testutil::write_text(dir.path() / "empty.txt", "");
    CHECK_THROWS_AS(load_embeddings(dir.path() / "empty.txt"), Error);
  }
  SUBCASE("missing file") {
    try {
      load_embeddings(dir.path() / "nope.txt");
      FAIL("expected MissingFile");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingFile);
    }
  }
  SUBCASE("duplicates: last wins, counted") {
    testutil::write_text(dir.path() / "dup.txt",
                         "bar 1 1\n"
                         "bar 2 2\n");
    const auto loaded = load_embeddings(dir.path() / "dup.txt");
    CHECK(loaded.duplicate_count == 1);
    CHECK(loaded.table.entries.at("bar")[0] == 2.0);
  }
}

TEST_CASE("tokenize_api_name splits underscores, digits and camel case") {
  CHECK(tokenize_api_name("bar") == std::vector<std::string>{"bar"});
  CHECK(tokenize_api_name("broken_barh") == std::vector<std::string>{"broken", "barh"});
  CHECK(tokenize_api_name("density_2d") == std::vector<std::string>{"density", "d"});
  CHECK(tokenize_api_name("stackPlot") == std::vector<std::string>{"stack", "plot"});
}

TEST_CASE("build_api_semantics direct, averaged and fallback rows") {
  WordEmbeddingTable table;
  table.dim = 4;
  table.entries["bar"] = (Eigen::VectorXd(4) << 1, 2, 3, 4).finished();
  table.entries["broken"] = (Eigen::VectorXd(4) << 2, 0, 0, 0).finished();
  table.entries["barh"] = (Eigen::VectorXd(4) << 0, 2, 0, 0).finished();

  ApiVocabulary vocab({"bar", "broken_barh", "histogram"});
  const auto sem = build_api_semantics(vocab, table);
  REQUIRE(sem.matrix.rows() == 3);
  REQUIRE(sem.matrix.cols() == 4);

  // direct row equals the table entry exactly
  CHECK(sem.provenance[0] == SemanticSource::Direct);
  CHECK(sem.matrix.row(0) == table.entries["bar"].transpose());

  // averaged row is the hand-computed midpoint of the token vectors
  CHECK(sem.provenance[1] == SemanticSource::Averaged);
  CHECK(sem.matrix(1, 0) == 1.0);
  CHECK(sem.matrix(1, 1) == 1.0);
  CHECK(sem.matrix(1, 2) == 0.0);
  CHECK(sem.matrix(1, 3) == 0.0);

  // missing token: unit-norm fallback, reproducible
  CHECK(sem.provenance[2] == SemanticSource::Fallback);
  CHECK(sem.matrix.row(2).norm() == doctest::Approx(1.0).epsilon(1e-12));
  const auto sem2 = build_api_semantics(vocab, table);
  CHECK(sem.matrix == sem2.matrix);
  CHECK(sem.content_hash() == sem2.content_hash());
}

TEST_CASE("no row is all-zero and fallback rows are name-determined") {
  ApiVocabulary vocab({"histogram", "sparkline_chart", "histogram2"});
  const auto sem = fallback_semantics(vocab, 16);
  for (int j = 0; j < sem.matrix.rows(); ++j) {
    CHECK(sem.matrix.row(j).norm() > 0.0);
  }
  // distinct names give distinct rows; "histogram2" tokenizes like
  // "histogram" but the fallback seed hashes the full API name
  CHECK(sem.matrix.row(0) != sem.matrix.row(1));
  CHECK(sem.matrix.row(0) != sem.matrix.row(2));

  ApiVocabulary other({"histogram", "violin"});
  const auto sem_other = fallback_semantics(other, 16);
  CHECK(sem.matrix.row(0) == sem_other.matrix.row(0));  // equal names, equal rows
}

TEST_SUITE_END();
