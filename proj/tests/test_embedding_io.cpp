#include "naa/embedding_io.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <random>

using namespace naa;
using naa::testing::TempDir;

TEST_CASE("load_embeddings: minimal file") {
  TempDir dir("emb");
  const auto res = load_embeddings(dir.write("e.txt", "a 1 0\nb 0 1\n"));
  CHECK(res.embeddings.dim() == 2);
  CHECK(res.embeddings.size() == 2);
  CHECK(res.embeddings.tokens() == std::vector<std::string>{"a", "b"});
  CHECK(res.embeddings.vectors()(0, 0) == 1.0);
  CHECK(res.embeddings.vectors()(1, 1) == 1.0);
  CHECK_FALSE(res.had_header);
  CHECK(res.skipped == 0);
}

TEST_CASE("load_embeddings: word2vec header is consumed") {
  TempDir dir("emb");
  const auto plain = load_embeddings(dir.write("a.txt", "a 1 0\nb 0 1"));
  const auto headed = load_embeddings(dir.write("b.txt", "2 2\na 1 0\nb 0 1"));
  CHECK(headed.had_header);
  CHECK(headed.embeddings.tokens() == plain.embeddings.tokens());
  CHECK(headed.embeddings.vectors() == plain.embeddings.vectors());
}

TEST_CASE("load_embeddings: CRLF, bad rows, duplicates, limit") {
  TempDir dir("emb");
  const auto path = dir.write("e.txt",
                              "a 1 2 3\r\n"
                              "b 4 5\r\n"        // wrong width
                              "c 1 nan 2\r\n"    // non-finite
                              "a 9 9 9\r\n"      // duplicate token
                              "d 7 8 9\r\n"
                              "e 0 0 1\r\n");
  const auto all = load_embeddings(path);
  CHECK(all.embeddings.tokens() == std::vector<std::string>{"a", "d", "e"});
  CHECK(all.skipped == 3);
  CHECK(all.embeddings.vectors()(0, 0) == 1.0);  // first "a" kept

  const auto limited = load_embeddings(path, {.limit = 2});
  CHECK(limited.embeddings.tokens() == std::vector<std::string>{"a", "d"});
}

TEST_CASE("load_embeddings: normalization flag") {
  TempDir dir("emb");
  const auto res = load_embeddings(dir.write("e.txt", "a 3 4\nz 0 0\n"), {.normalize = true});
  CHECK(res.embeddings.vectors()(0, 0) == doctest::Approx(0.6));
  CHECK(res.embeddings.vectors()(1, 0) == doctest::Approx(0.8));
  CHECK(res.embeddings.vectors().col(1).norm() == 0.0);
}

TEST_CASE("load_embeddings: errors") {
  TempDir dir("emb");
  CHECK_THROWS_AS(load_embeddings(dir.path() / "missing.txt"), DataError);
  CHECK_THROWS_AS(load_embeddings(dir.write("empty.txt", "")), FormatError);
  CHECK_THROWS_AS(load_embeddings(dir.write("mixed.txt", "a 1 2\nb 1\nc 1\nd 1 2 3\n")), FormatError);
}

TEST_CASE("EmbeddingSet invariants") {
  CHECK_THROWS_AS(EmbeddingSet({"a", "a"}, Matrix::Zero(2, 2)), DataError);
  CHECK_THROWS_AS(EmbeddingSet({"a"}, Matrix::Zero(2, 2)), DataError);
  Matrix bad = Matrix::Zero(2, 1);
  bad(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(EmbeddingSet({"a"}, bad), DataError);

  EmbeddingSet set({"x", "y", "z"}, Matrix::Identity(3, 3));
  for (Index i = 0; i < set.size(); ++i) CHECK(set.find(set.token(i)) == i);
  CHECK_FALSE(set.find("w").has_value());
}

TEST_CASE("save/load round trip is bit-exact") {
  TempDir dir("emb");
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix V(7, 20);
    for (Index j = 0; j < V.cols(); ++j)
      for (Index i = 0; i < V.rows(); ++i) V(i, j) = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    std::vector<std::string> tokens;
    for (int j = 0; j < 20; ++j) tokens.push_back("tok" + std::to_string(j));
    const EmbeddingSet set(tokens, V);
    const auto path = dir.path() / ("rt" + std::to_string(trial) + ".txt");
    save_embeddings(path, set, trial % 2 == 1);
    const auto back = load_embeddings(path);
    CHECK(back.embeddings.tokens() == set.tokens());
    CHECK(back.embeddings.vectors() == set.vectors());
  }
}

namespace {
EmbeddingSet toy(std::vector<std::string> tokens) {
  const auto n = static_cast<Index>(tokens.size());
  return EmbeddingSet(std::move(tokens), naa::testing::random_normal(3, n, 5));
}
}  // namespace

TEST_CASE("load_lexicon: multi-translation entries share a source index") {
  TempDir dir("lex");
  const auto en = toy({"dog", "good"});
  const auto it = toy({"cane", "cani", "buon"});
  const auto res = load_lexicon(dir.write("l.tsv", "dog\tcane\ndog\tcani\n"), en, it);
  REQUIRE(res.lexicon.size() == 2);
  CHECK(res.lexicon.pairs[0].src == res.lexicon.pairs[1].src);
  CHECK(res.lexicon.pairs[0].tgt == 0);
  CHECK(res.lexicon.pairs[1].tgt == 1);
  CHECK(res.lexicon.tgt_tokens[1] == "cani");
}

TEST_CASE("load_lexicon: OOV skip, space fallback, duplicates, order") {
  TempDir dir("lex");
  const auto en = toy({"dog", "good", "new"});
  const auto it = toy({"cane", "buon", "nuove"});
  const auto res = load_lexicon(dir.write("l.tsv",
                                          "new nuove\r\n"
                                          "dog\tgatto\n"  // OOV target
                                          "\n"
                                          "good\tbuon\n"
                                          "good\tbuon\n"  // exact duplicate
                                          "dog\tcane\n"),
                                en, it);
  CHECK(res.skipped == 1);
  CHECK(res.duplicates == 1);
  REQUIRE(res.lexicon.size() == 3);
  CHECK(res.lexicon.src_tokens == std::vector<std::string>{"new", "good", "dog"});
}

TEST_CASE("load_lexicon: zero resolvable pairs") {
  TempDir dir("lex");
  const auto en = toy({"dog"});
  const auto it = toy({"cane"});
  CHECK_THROWS_WITH_AS(load_lexicon(dir.write("e.tsv", ""), en, it), doctest::Contains("zero resolvable pairs"),
                       DataError);
  CHECK_THROWS_AS(load_lexicon(dir.write("o.tsv", "cat\tgatto\n"), en, it), DataError);
  CHECK_THROWS_AS(load_lexicon(dir.path() / "nope.tsv", en, it), DataError);
}

TEST_CASE("build_identity_lexicon") {
  const auto a = toy({"a", "b", "c"});
  const auto lex = build_identity_lexicon(a, a);
  REQUIRE(lex.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(lex.pairs[i].src == static_cast<Index>(i));
    CHECK(lex.pairs[i].tgt == static_cast<Index>(i));
  }

  const auto left = toy({"x", "b", "y", "stop", "c"});
  const auto right = toy({"c", "stop", "b", "z"});
  const StopList stop{"stop"};
  const auto partial = build_identity_lexicon(left, right, &stop);
  CHECK(partial.src_tokens == std::vector<std::string>{"b", "c"});
  CHECK(partial.pairs[0] == LexiconPair{1, 2});
  CHECK(partial.pairs[1] == LexiconPair{4, 0});

  const auto only_b = toy({"a", "b"});
  const auto other_b = toy({"b", "q"});
  const StopList stop_b{"b"};
  CHECK_THROWS_AS(build_identity_lexicon(only_b, other_b, &stop_b), DataError);
}

TEST_CASE("stop-list and frequency table loaders") {
  TempDir dir("aux");
  const auto stop = load_stoplist(dir.write("s.txt", "the\r\n  of \n\nand\n"));
  CHECK(stop == StopList{"the", "of", "and"});

  const auto freq = load_frequency_table(dir.write("f.tsv", "the\t0.05\nrare\t1e-7\n"));
  CHECK(freq.size() == 2);
  CHECK(freq.lookup("rare") == doctest::Approx(1e-7));
  CHECK_FALSE(freq.lookup("missing").has_value());
  CHECK_THROWS_AS(load_frequency_table(dir.write("g.tsv", "x\t1.5\n")), FormatError);
  CHECK_THROWS_AS(load_frequency_table(dir.write("h.tsv", "x 0.5\n")), FormatError);
}

TEST_CASE("gather_pairs") {
  const EmbeddingSet src({"dog", "good"}, (Matrix(2, 2) << 1, 2, 3, 4).finished());
  const EmbeddingSet tgt({"cane", "cani", "buon"}, (Matrix(2, 3) << 5, 6, 7, 8, 9, 10).finished());
  Lexicon one;
  one.push_back({0, 0}, "dog", "cane");
  auto p = gather_pairs(one, src, tgt);
  CHECK(p.X.cols() == 1);
  CHECK(p.Y.cols() == 1);

  Lexicon dup = one;
  dup.push_back({0, 1}, "dog", "cani");
  dup.push_back({1, 2}, "good", "buon");
  p = gather_pairs(dup, src, tgt);
  CHECK(p.X.cols() == 3);
  CHECK(p.Y.cols() == 3);
  CHECK(p.X.col(0) == p.X.col(1));
  CHECK(p.Y.col(1) == tgt.column(1));

  const EmbeddingSet wide({"cane"}, Matrix::Ones(3, 1));
  CHECK_THROWS_AS(gather_pairs(one, src, wide), DataError);
  CHECK_THROWS_AS(gather_pairs(Lexicon{}, src, tgt), DataError);
}

TEST_CASE("gather_pairs on a nine-pair mixed lexicon") {
  const auto en = toy({"dog", "good", "new"});
  const auto it = toy({"cane", "cani", "dog", "buon", "buona", "santo", "new", "york", "nuove"});
  TempDir dir("lex");
  const auto res = load_lexicon(dir.write("t2.tsv",
                                          "dog\tcane\ndog\tcani\ndog\tdog\n"
                                          "good\tbuon\ngood\tbuona\ngood\tsanto\n"
                                          "new\tnew\nnew\tyork\nnew\tnuove\n"),
                                en, it);
  const auto p = gather_pairs(res.lexicon, en, it);
  CHECK(p.X.cols() == 9);
  CHECK(p.Y.cols() == 9);
}
