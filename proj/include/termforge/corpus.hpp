#pragma once

// Dependency-parsed corpora in CoNLL-U format.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace termforge {

struct Token {
  std::size_t index = 0;  // 1-based position in the sentence
  std::string form;
  std::string lemma;      // lowercase
  std::string upos;
  std::size_t head = 0;   // 0 = root
  std::string deprel;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;

  // Token with 1-based index `i`.
  const Token& at(std::size_t i) const { return tokens.at(i - 1); }

  bool operator==(const Sentence&) const = default;
};

struct Document {
  std::string id;
  std::vector<Sentence> sentences;

  bool operator==(const Document&) const = default;
};

struct Corpus {
  std::vector<Document> documents;

  bool operator==(const Corpus&) const = default;
};

struct CorpusStats {
  std::size_t n_documents = 0;
  std::size_t n_sentences = 0;
  std::size_t n_words = 0;  // every token line, punctuation included
  double words_per_document = 0.0;

  bool operator==(const CorpusStats&) const = default;
};

// ASCII lowercase; bytes >= 0x80 pass through untouched.
std::string to_lower(std::string_view s);

/// Parses CoNLL-U text.
///
/// Documents start at `# newdoc id = X` comments; tokens appearing before any
/// such comment belong to a document named `default_doc_id`. Sentence ids come
/// from `# sent_id = Y`, otherwise `<doc id>.<n>`. Multiword ranges (`3-4`) and
/// empty nodes (`5.1`) are skipped. A `_` lemma falls back to the form; lemmas
/// are lowercased.
///
/// Throws ParseError for a line without exactly 10 tab-separated columns, a
/// non-integer ID or HEAD, a HEAD outside the sentence or equal to its own ID,
/// non-contiguous token ids, and duplicate document or sentence ids.
Corpus parse_conllu(std::istream& in, const std::string& default_doc_id = "doc");
Corpus parse_conllu(const std::string& text, const std::string& default_doc_id = "doc");

// Loads one `.conllu` file, or every `*.conllu` file in a directory in
// filename order (each file's implicit document is named after its stem).
Corpus load_corpus(const std::filesystem::path& path);

// Writes the fields this model keeps; XPOS, FEATS, DEPS and MISC become `_`.
void write_conllu(const Corpus& corpus, std::ostream& out);

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace termforge
