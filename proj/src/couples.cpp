#include "termforge/couples.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "termforge/error.hpp"

namespace termforge {

namespace {

bool has_label(const std::set<std::string>& labels, const std::string& deprel) {
  return labels.contains(to_lower(deprel));
}

std::vector<const Token*> dependents(const Sentence& s, std::size_t head) {
  std::vector<const Token*> out;
  for (const auto& t : s.tokens) {
    if (t.head == head) out.push_back(&t);
  }
  return out;
}

const std::string kHeader = "vpc\trole\tnp\tsentence_id";

}  // namespace

NounPhrase::NounPhrase(std::string_view text) {
  std::istringstream words{to_lower(text)};
  std::string word;
  while (words >> word) {
    if (!text_.empty()) text_ += ' ';
    text_ += word;
  }
  if (text_.empty()) throw Error("empty noun phrase");
}

const char* role_name(Role role) { return role == Role::Subject ? "subject" : "object"; }

Role parse_role(std::string_view name) {
  const auto lower = to_lower(name);
  if (lower == "subject" || lower == "subj") return Role::Subject;
  if (lower == "object" || lower == "obj") return Role::Object;
  throw Error("unknown role '" + std::string(name) + "'");
}

ExtractionConfig ExtractionConfig::spacy() { return ExtractionConfig{}; }

ExtractionConfig ExtractionConfig::universal_dependencies() {
  ExtractionConfig c;
  c.passive_subject_labels = {"nsubj:pass"};
  c.object_labels = {"obj"};
  c.preposition_labels = {};
  c.preposition_object_labels = {};
  c.oblique_labels = {"obl", "nmod"};
  return c;
}

NounPhrase assemble_np(const Sentence& sentence, const Token& head, const ExtractionConfig& config) {
  std::vector<std::size_t> run{head.index};
  for (std::size_t j = head.index - 1; j >= 1; --j) {
    const auto& t = sentence.at(j);
    if (!has_label(config.np_modifier_labels, t.deprel)) break;
    bool attached = false;
    for (auto member : run) attached = attached || t.head == member;
    if (!attached) break;
    run.push_back(j);
  }
  std::string text;
  for (auto it = run.rbegin(); it != run.rend(); ++it) {
    if (!text.empty()) text += ' ';
    text += sentence.at(*it).lemma;
  }
  return NounPhrase(text);
}

std::vector<Couple> extract_couples(const Sentence& sentence, const ExtractionConfig& config) {
  std::vector<Couple> out;
  for (const auto& verb : sentence.tokens) {
    if (!config.verb_upos.contains(verb.upos)) continue;
    if (config.root_only && (verb.head != 0 || !has_label(config.root_labels, verb.deprel))) continue;

    const Vpc bare{verb.lemma, std::nullopt};
    auto emit = [&](Vpc vpc, Role role, const Token& np_head) {
      out.push_back(Couple{std::move(vpc), role, assemble_np(sentence, np_head, config), sentence.id});
    };

    for (const Token* dep : dependents(sentence, verb.index)) {
      if (has_label(config.subject_labels, dep->deprel)) {
        emit(bare, Role::Subject, *dep);
      } else if (has_label(config.object_labels, dep->deprel) ||
                 has_label(config.passive_subject_labels, dep->deprel)) {
        emit(bare, Role::Object, *dep);
      } else if (has_label(config.preposition_labels, dep->deprel)) {
        for (const Token* pobj : dependents(sentence, dep->index)) {
          if (has_label(config.preposition_object_labels, pobj->deprel)) {
            emit(Vpc{verb.lemma, dep->lemma}, Role::Object, *pobj);
          }
        }
      } else if (has_label(config.oblique_labels, dep->deprel)) {
        for (const Token* mark : dependents(sentence, dep->index)) {
          if (has_label(config.case_labels, mark->deprel)) {
            emit(Vpc{verb.lemma, mark->lemma}, Role::Object, *dep);
            break;
          }
        }
      }
    }
  }
  return out;
}

CoupleSet extract_corpus(const Corpus& corpus, const ExtractionConfig& config) {
  CoupleSet all;
  for (const auto& doc : corpus.documents) {
    for (const auto& s : doc.sentences) {
      auto part = extract_couples(s, config);
      all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
  }
  return all;
}

void write_couples(const CoupleSet& couples, std::ostream& out, bool header) {
  if (header) out << kHeader << '\n';
  for (const auto& c : couples) {
    out << c.vpc.key() << '\t' << role_name(c.role) << '\t' << c.np.text() << '\t' << c.sentence_id
        << '\n';
  }
}

CoupleSet read_couples(std::istream& in) {
  CoupleSet out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == kHeader) continue;
    std::vector<std::string> cols;
    std::string col;
    std::istringstream fields(line);
    while (std::getline(fields, col, '\t')) cols.push_back(col);
    if (cols.size() != 4) throw ParseError(line_no, "expected 4 tab-separated columns");
    if (cols[0].empty()) throw ParseError(line_no, "empty VPC key");
    Couple c;
    const auto sep = cols[0].find('_');
    if (sep == std::string::npos) {
      c.vpc = Vpc{cols[0], std::nullopt};
    } else {
      c.vpc = Vpc{cols[0].substr(0, sep), cols[0].substr(sep + 1)};
    }
    try {
      c.role = parse_role(cols[1]);
      c.np = NounPhrase(cols[2]);
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
    c.sentence_id = cols[3];
    out.push_back(std::move(c));
  }
  return out;
}

CoupleSet read_couples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return read_couples(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path.string());
  }
}

}  // namespace termforge
