#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "termforge/corpus.hpp"
#include "termforge/error.hpp"

using namespace termforge;

namespace {

std::string token(int id, const std::string& form, const std::string& lemma, const std::string& upos,
                  int head, const std::string& rel) {
  return std::to_string(id) + "\t" + form + "\t" + lemma + "\t" + upos + "\t_\t_\t" + std::to_string(head) +
         "\t" + rel + "\t_\t_\n";
}

}  // namespace

TEST_CASE("two-sentence document with seven tokens") {
  const std::string text = "# newdoc id = d1\n# sent_id = s1\n" + token(1, "Bart", "Bart", "PROPN", 2, "nsubj") +
                           token(2, "sleeps", "sleep", "VERB", 0, "ROOT") + token(3, ".", ".", "PUNCT", 2, "punct") +
                           "\n# sent_id = s2\n" + token(1, "Lisa", "Lisa", "PROPN", 2, "nsubj") +
                           token(2, "plays", "play", "VERB", 0, "ROOT") + token(3, "sax", "sax", "NOUN", 2, "dobj") +
                           token(4, ".", ".", "PUNCT", 2, "punct") + "\n";
  const Corpus c = parse_conllu(text);
  REQUIRE(c.documents.size() == 1);
  CHECK(c.documents[0].id == "d1");
  REQUIRE(c.documents[0].sentences.size() == 2);
  CHECK(c.documents[0].sentences[0].tokens.size() + c.documents[0].sentences[1].tokens.size() == 7);
  CHECK(c.documents[0].sentences[1].id == "s2");
  CHECK(c.documents[0].sentences[0].at(1).lemma == "bart");
  CHECK(c.documents[0].sentences[1].at(3).head == 2);
}

TEST_CASE("empty input gives an empty corpus") {
  CHECK(parse_conllu(std::string{}).documents.empty());
  CHECK(parse_conllu(std::string{"\n\n# just a comment\n"}).documents.empty());
}

TEST_CASE("wrong column count names the line") {
  std::string text = "# newdoc id = d\n";
  for (int i = 1; i <= 10; ++i) text += token(i, "w", "w", "NOUN", i == 1 ? 0 : 1, i == 1 ? "ROOT" : "dep");
  text += "11\tw\tw\tNOUN\t_\t_\t1\tdep\t_\n";  // line 12, nine columns
  try {
    parse_conllu(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 12);
    CHECK(std::string(e.what()).find("line 12") != std::string::npos);
  }
}

TEST_CASE("malformed ids and heads are rejected") {
  CHECK_THROWS_AS(parse_conllu("x\tw\tw\tNOUN\t_\t_\t0\tROOT\t_\t_\n"), ParseError);
  CHECK_THROWS_AS(parse_conllu(token(1, "a", "a", "NOUN", 0, "ROOT") + token(3, "b", "b", "NOUN", 1, "dep")),
                  ParseError);
  CHECK_THROWS_AS(parse_conllu(token(1, "a", "a", "NOUN", 0, "ROOT") + token(2, "b", "b", "NOUN", 5, "dep")),
                  ParseError);
  CHECK_THROWS_AS(parse_conllu(token(1, "a", "a", "NOUN", 1, "ROOT")), ParseError);
  CHECK_THROWS_AS(parse_conllu("1\ta\ta\tNOUN\t_\t_\tx\tROOT\t_\t_\n"), ParseError);
}

TEST_CASE("multiword ranges and empty nodes are skipped; underscore lemma falls back") {
  const std::string text = "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n" + token(1, "Do", "do", "AUX", 3, "aux") +
                           token(2, "n't", "not", "PART", 3, "neg") + "3\tGo\t_\tVERB\t_\t_\t0\tROOT\t_\t_\n" +
                           "3.1\tgo\tgo\tVERB\t_\t_\t_\t_\t_\t_\n";
  const Corpus c = parse_conllu(text, "fallback");
  REQUIRE(c.documents.size() == 1);
  CHECK(c.documents[0].id == "fallback");
  const auto& s = c.documents[0].sentences.at(0);
  CHECK(s.tokens.size() == 3);
  CHECK(s.at(3).lemma == "go");
  CHECK(s.id == "fallback.1");
}

TEST_CASE("duplicate document ids are rejected") {
  const std::string one = "# newdoc id = d\n" + token(1, "a", "a", "NOUN", 0, "ROOT") + "\n";
  CHECK_THROWS_AS(parse_conllu(one + one), Error);
}

TEST_CASE("corpus statistics") {
  SUBCASE("3 docs, 5 sentences, 60 tokens") {
    Corpus c;
    const int sentences_per_doc[] = {2, 2, 1};
    for (int d = 0; d < 3; ++d) {
      Document doc{"d" + std::to_string(d), {}};
      for (int s = 0; s < sentences_per_doc[d]; ++s) {
        Sentence sent{doc.id + "." + std::to_string(s), {}};
        for (std::size_t t = 1; t <= 12; ++t) sent.tokens.push_back({t, "w", "w", "NOUN", std::size_t{t == 1 ? 0u : 1u}, "dep"});
        doc.sentences.push_back(sent);
      }
      c.documents.push_back(doc);
    }
    CHECK(corpus_stats(c) == CorpusStats{3, 5, 60, 20.0});
  }
  SUBCASE("one empty document") {
    Corpus c{{Document{"d", {}}}};
    CHECK(corpus_stats(c) == CorpusStats{1, 0, 0, 0.0});
  }
  SUBCASE("no documents") { CHECK(corpus_stats(Corpus{}) == CorpusStats{}); }
}

TEST_CASE("write then parse round-trips") {
  const Corpus c = load_corpus(testing::mini_corpus());
  std::ostringstream out;
  write_conllu(c, out);
  CHECK(parse_conllu(out.str()) == c);
}

TEST_CASE("directory loading sorts files and names documents") {
  const Corpus c = load_corpus(testing::mini_corpus());
  REQUIRE(c.documents.size() == 5);
  CHECK(c.documents.front().id == "music_01");
  CHECK(c.documents.back().id == "music_05");
  const auto s = corpus_stats(c);
  CHECK(s.n_sentences == 51);
  CHECK_THROWS_AS(load_corpus(testing::data_dir() / "does_not_exist"), Error);
}
