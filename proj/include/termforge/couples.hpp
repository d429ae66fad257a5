#pragma once

// Skeleton co-occurrence couples: noun phrases acting as subject or object of a
// verb, or as object of a verb+preposition combination.

#include <compare>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "termforge/corpus.hpp"

namespace termforge {

// Normalized lowercase lemma string, words separated by single spaces.
class NounPhrase {
 public:
  NounPhrase() = default;
  // Lowercases and collapses whitespace. Throws Error when nothing remains.
  explicit NounPhrase(std::string_view text);

  const std::string& text() const noexcept { return text_; }

  auto operator<=>(const NounPhrase&) const = default;

 private:
  std::string text_;
};

// Verb lemma, optionally fused with a preposition: "extract" or "extract_from".
struct Vpc {
  std::string verb;
  std::optional<std::string> preposition;

  std::string key() const { return preposition ? verb + "_" + *preposition : verb; }

  auto operator<=>(const Vpc&) const = default;
};

enum class Role { Subject, Object };

const char* role_name(Role role);
Role parse_role(std::string_view name);

struct Couple {
  Vpc vpc;
  Role role = Role::Subject;
  NounPhrase np;
  std::string sentence_id;

  auto operator<=>(const Couple&) const = default;
};

// Multiset of couples; repeated couples are frequencies.
using CoupleSet = std::vector<Couple>;

// Dependency-label table driving extraction. Labels are compared
// case-insensitively.
struct ExtractionConfig {
  std::set<std::string> verb_upos{"VERB"};
  std::set<std::string> root_labels{"root"};
  std::set<std::string> subject_labels{"nsubj"};
  std::set<std::string> passive_subject_labels{"nsubjpass"};
  std::set<std::string> object_labels{"dobj"};
  // Preposition attached to the verb whose own dependent is the object (spaCy).
  std::set<std::string> preposition_labels{"prep"};
  std::set<std::string> preposition_object_labels{"pobj"};
  // Nominal attached to the verb carrying its preposition as a case dependent (UD).
  std::set<std::string> oblique_labels{};
  std::set<std::string> case_labels{"case"};
  std::set<std::string> np_modifier_labels{"compound", "flat", "amod"};
  bool root_only = false;

  static ExtractionConfig spacy();
  static ExtractionConfig universal_dependencies();
};

/// Noun phrase headed by `head`: its lemma preceded by the contiguous run of
/// modifier tokens immediately to its left. A token joins the run when its
/// deprel is a modifier label and it attaches to the head or to a token
/// already in the run, so compound chains are kept whole.
NounPhrase assemble_np(const Sentence& sentence, const Token& head, const ExtractionConfig& config);

/// Couples for every verbal head of the sentence (only ROOT heads when
/// config.root_only). Passive subjects are recorded with role Object.
std::vector<Couple> extract_couples(const Sentence& sentence, const ExtractionConfig& config);

CoupleSet extract_corpus(const Corpus& corpus, const ExtractionConfig& config);

// TSV: vpc_key<TAB>role<TAB>np_text<TAB>sentence_id, one line per occurrence.
void write_couples(const CoupleSet& couples, std::ostream& out, bool header = false);
// Accepts files with or without the header line.
CoupleSet read_couples(std::istream& in);
CoupleSet read_couples(const std::filesystem::path& path);

}  // namespace termforge
