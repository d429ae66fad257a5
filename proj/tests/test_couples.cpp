#include <doctest.h>

#include <set>
#include <sstream>

#include "support.hpp"
#include "termforge/corpus.hpp"
#include "termforge/couples.hpp"
#include "termforge/error.hpp"

using namespace termforge;

namespace {

std::set<std::tuple<std::string, Role, std::string>> triples(const CoupleSet& cs) {
  std::set<std::tuple<std::string, Role, std::string>> out;
  for (const auto& c : cs) out.emplace(c.vpc.key(), c.role, c.np.text());
  return out;
}

CoupleSet extract_file(const std::string& name, const ExtractionConfig& cfg = ExtractionConfig::spacy()) {
  return extract_corpus(load_corpus(testing::data_dir() / name), cfg);
}

}  // namespace

TEST_CASE("ontowrapper sentence yields its three couples") {
  const auto cs = extract_file("ontowrapper.conllu");
  CHECK(cs.size() == 3);
  CHECK(triples(cs) == std::set<std::tuple<std::string, Role, std::string>>{
                           {"extract", Role::Subject, "ontowrapper"},
                           {"extract", Role::Object, "information"},
                           {"extract_from", Role::Object, "on-line resource"}});
}

TEST_CASE("Bart travels by boat") {
  const auto cs = extract_file("bart.conllu");
  CHECK(cs.size() == 2);
  CHECK(triples(cs) == std::set<std::tuple<std::string, Role, std::string>>{
                           {"travel", Role::Subject, "bart"}, {"travel_by", Role::Object, "boat"}});
}

TEST_CASE("passive subject is recorded as object") {
  const auto cs = extract_file("passive.conllu");
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].vpc.key() == "build");
  CHECK(cs[0].role == Role::Object);
  CHECK(cs[0].np.text() == "ontology");
  CHECK(cs[0].sentence_id == "passive.1");
}

TEST_CASE("UD labels through the UD preset") {
  const auto cs = extract_file("ud_passive.conllu", ExtractionConfig::universal_dependencies());
  CHECK(triples(cs) == std::set<std::tuple<std::string, Role, std::string>>{
                           {"build", Role::Object, "ontology"}, {"build_from", Role::Object, "corpus"}});
}

TEST_CASE("noun phrase assembly") {
  const auto sent = load_corpus(testing::data_dir() / "ontowrapper.conllu").documents[0].sentences[0];
  const auto cfg = ExtractionConfig::spacy();
  CHECK(assemble_np(sent, sent.at(8), cfg).text() == "on-line resource");
  CHECK(assemble_np(sent, sent.at(4), cfg).text() == "information");
  const auto chain = load_corpus(testing::data_dir() / "compound_chain.conllu").documents[0].sentences[0];
  CHECK(assemble_np(chain, chain.at(6), cfg).text() == "ontology learning corpus");
}

TEST_CASE("corpus of both sentences yields five couples") {
  Corpus c = load_corpus(testing::data_dir() / "ontowrapper.conllu");
  const Corpus bart = load_corpus(testing::data_dir() / "bart.conllu");
  c.documents.push_back(bart.documents[0]);
  CHECK(extract_corpus(c, ExtractionConfig::spacy()).size() == 5);
}

TEST_CASE("empty and verbless corpora yield nothing") {
  CHECK(extract_corpus(Corpus{}, ExtractionConfig::spacy()).empty());
  const Corpus verbless = parse_conllu(std::string(
      "1\tBig\tbig\tADJ\t_\t_\t2\tamod\t_\t_\n2\tdogs\tdog\tNOUN\t_\t_\t0\tROOT\t_\t_\n"));
  CHECK(extract_corpus(verbless, ExtractionConfig::spacy()).empty());
}

TEST_CASE("root-only restricts to the sentence root") {
  // "Lisa says Bart plays sax": says is root, plays a clausal complement.
  const Corpus c = parse_conllu(std::string(
      "1\tLisa\tLisa\tPROPN\t_\t_\t2\tnsubj\t_\t_\n"
      "2\tsays\tsay\tVERB\t_\t_\t0\tROOT\t_\t_\n"
      "3\tBart\tBart\tPROPN\t_\t_\t4\tnsubj\t_\t_\n"
      "4\tplays\tplay\tVERB\t_\t_\t2\tccomp\t_\t_\n"
      "5\tsax\tsax\tNOUN\t_\t_\t4\tdobj\t_\t_\n"));
  auto cfg = ExtractionConfig::spacy();
  CHECK(extract_corpus(c, cfg).size() == 3);
  cfg.root_only = true;
  const auto cs = extract_corpus(c, cfg);
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].vpc.key() == "say");
}

TEST_CASE("noun phrases are normalized") {
  CHECK(NounPhrase("  On-Line   Resource ").text() == "on-line resource");
  CHECK_THROWS_AS(NounPhrase("   "), Error);
}

TEST_CASE("couples TSV round-trips, with and without header") {
  const auto cs = extract_corpus(load_corpus(testing::mini_corpus()), ExtractionConfig::spacy());
  REQUIRE(!cs.empty());
  for (bool header : {false, true}) {
    std::stringstream io;
    write_couples(cs, io, header);
    CHECK(read_couples(io) == cs);
  }
  std::istringstream bad("extract\tagent\tfoo\ts1\n");
  CHECK_THROWS_AS(read_couples(bad), Error);
}
