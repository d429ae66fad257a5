#include "termforge/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "termforge/error.hpp"

namespace termforge {

namespace {

constexpr std::size_t kColumns = 10;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_index(std::string_view s, std::size_t& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

// Value of a `# key = value` comment, or empty when the comment is another key.
std::string_view comment_value(std::string_view line, std::string_view key) {
  auto body = trim(line.substr(1));
  if (body.substr(0, key.size()) != key) return {};
  body = trim(body.substr(key.size()));
  if (body.empty() || body.front() != '=') return {};
  return trim(body.substr(1));
}

class Reader {
 public:
  Reader(std::string default_doc_id) : default_doc_id_(std::move(default_doc_id)) {}

  void feed(std::string_view line, std::size_t line_no) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      flush_sentence();
      return;
    }
    if (line.front() == '#') {
      comment(line, line_no);
      return;
    }
    token(line, line_no);
  }

  Corpus finish() {
    flush_sentence();
    return std::move(corpus_);
  }

 private:
  void comment(std::string_view line, std::size_t line_no) {
    if (trim(line.substr(1)).substr(0, 6) == "newdoc") {
      flush_sentence();
      std::string id(comment_value(line, "newdoc id"));
      if (id.empty()) id = default_doc_id_ + "-" + std::to_string(corpus_.documents.size() + 1);
      if (!doc_ids_.insert(id).second) throw ParseError(line_no, "duplicate document id '" + id + "'");
      corpus_.documents.push_back(Document{id, {}});
      return;
    }
    if (const auto id = comment_value(line, "sent_id"); !id.empty()) {
      if (!pending_.tokens.empty()) flush_sentence();
      pending_id_ = std::string(id);
      pending_id_line_ = line_no;
    }
  }

  void token(std::string_view line, std::size_t line_no) {
    const auto cols = split_tabs(line);
    if (cols.size() != kColumns) {
      throw ParseError(line_no, "expected 10 tab-separated columns, found " +
                                    std::to_string(cols.size()));
    }
    const auto id = cols[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) return;

    Token t;
    if (!parse_index(id, t.index) || t.index == 0) {
      throw ParseError(line_no, "token id '" + std::string(id) + "' is not a positive integer");
    }
    if (t.index != pending_.tokens.size() + 1) {
      throw ParseError(line_no, "token id " + std::to_string(t.index) + " breaks the 1..n sequence");
    }
    if (!parse_index(cols[6], t.head)) {
      throw ParseError(line_no, "head '" + std::string(cols[6]) + "' is not an integer");
    }
    if (t.head == t.index) throw ParseError(line_no, "token is its own head");
    t.form = std::string(cols[1]);
    t.lemma = cols[2] == "_" ? to_lower(cols[1]) : to_lower(cols[2]);
    if (t.lemma.empty()) throw ParseError(line_no, "empty lemma");
    t.upos = std::string(cols[3]);
    t.deprel = std::string(cols[7]);
    if (pending_.tokens.empty()) first_line_ = line_no;
    pending_.tokens.push_back(std::move(t));
    token_lines_.push_back(line_no);
  }

  void flush_sentence() {
    if (pending_.tokens.empty()) {
      pending_id_.clear();
      return;
    }
    const auto n = pending_.tokens.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (pending_.tokens[i].head > n) {
        throw ParseError(token_lines_[i], "head " + std::to_string(pending_.tokens[i].head) +
                                              " outside sentence of " + std::to_string(n) +
                                              " tokens");
      }
    }
    if (corpus_.documents.empty()) {
      doc_ids_.insert(default_doc_id_);
      corpus_.documents.push_back(Document{default_doc_id_, {}});
    }
    auto& doc = corpus_.documents.back();
    std::size_t id_line = first_line_;
    if (pending_id_.empty()) {
      pending_id_ = doc.id + "." + std::to_string(doc.sentences.size() + 1);
    } else {
      id_line = pending_id_line_;
    }
    if (!sentence_ids_.insert(pending_id_).second) {
      throw ParseError(id_line, "duplicate sentence id '" + pending_id_ + "'");
    }
    pending_.id = std::move(pending_id_);
    doc.sentences.push_back(std::move(pending_));
    pending_ = Sentence{};
    pending_id_.clear();
    token_lines_.clear();
  }

  std::string default_doc_id_;
  Corpus corpus_;
  Sentence pending_;
  std::string pending_id_;
  std::size_t pending_id_line_ = 0;
  std::size_t first_line_ = 0;
  std::vector<std::size_t> token_lines_;
  std::set<std::string> doc_ids_;
  std::set<std::string> sentence_ids_;
};

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

Corpus parse_conllu(std::istream& in, const std::string& default_doc_id) {
  Reader reader(default_doc_id);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) reader.feed(line, ++line_no);
  return reader.finish();
}

Corpus parse_conllu(const std::string& text, const std::string& default_doc_id) {
  std::istringstream in(text);
  return parse_conllu(in, default_doc_id);
}

Corpus load_corpus(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".conllu") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path)) {
    files.push_back(path);
  } else {
    throw Error("corpus path not found: " + path.string());
  }

  Corpus corpus;
  std::set<std::string> doc_ids;
  std::set<std::string> sentence_ids;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    Corpus part;
    try {
      part = parse_conllu(in, file.stem().string());
    } catch (const ParseError& e) {
      throw ParseError(e.line(), e.detail(), file.string());
    }
    for (auto& doc : part.documents) {
      if (!doc_ids.insert(doc.id).second) {
        throw Error(file.string() + ": document id '" + doc.id + "' already used by another file");
      }
      for (const auto& s : doc.sentences) {
        if (!sentence_ids.insert(s.id).second) {
          throw Error(file.string() + ": sentence id '" + s.id + "' already used by another file");
        }
      }
      corpus.documents.push_back(std::move(doc));
    }
  }
  return corpus;
}

void write_conllu(const Corpus& corpus, std::ostream& out) {
  for (const auto& doc : corpus.documents) {
    out << "# newdoc id = " << doc.id << '\n';
    for (const auto& s : doc.sentences) {
      out << "# sent_id = " << s.id << '\n';
      for (const auto& t : s.tokens) {
        out << t.index << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << "\t_\t_\t"
            << t.head << '\t' << t.deprel << "\t_\t_\n";
      }
      out << '\n';
    }
  }
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats st;
  st.n_documents = corpus.documents.size();
  for (const auto& doc : corpus.documents) {
    st.n_sentences += doc.sentences.size();
    for (const auto& s : doc.sentences) st.n_words += s.tokens.size();
  }
  if (st.n_documents > 0) {
    st.words_per_document = static_cast<double>(st.n_words) / static_cast<double>(st.n_documents);
  }
  return st;
}

}  // namespace termforge
