#include "zscat/datasets.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include "zscat/errors.h"
#include "zscat/text_pipeline.h"

namespace zscat {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

// Comma-separated phrases, trimmed and lowercased, empties and repeats dropped.
std::vector<std::string> split_tags(std::string_view s) {
  std::vector<std::string> tags;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t end = s.find(',', pos);
    if (end == std::string_view::npos) end = s.size();
    std::string tag = lower(trim(s.substr(pos, end - pos)));
    if (!tag.empty() && std::find(tags.begin(), tags.end(), tag) == tags.end()) {
      tags.push_back(std::move(tag));
    }
    pos = end + 1;
  }
  return tags;
}

// Reads a line and drops a trailing CR.
bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); });
}

std::vector<std::string> split_delimited(std::string_view line, char delim,
                                         std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"' && field.empty() && !field_was_quoted) {
      quoted = true;
      field_was_quoted = true;
    } else if (ch == delim) {
      fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else {
      field.push_back(ch);
    }
  }
  if (quoted) throw MalformedRecord("unterminated quoted field", line_no);
  fields.push_back(std::move(field));
  return fields;
}

std::string one_line(std::string s) {
  std::replace_if(s.begin(), s.end(),
                  [](char ch) { return ch == '\t' || ch == '\n' || ch == '\r'; }, ' ');
  return s;
}

template <typename Parse>
auto parse_file(const std::string& path, Parse parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse(in);
}

}  // namespace

ParsedCorpus parse_corpus(std::istream& in) {
  ParsedCorpus out;
  std::string line;
  for (std::size_t line_no = 1; next_line(in, line); ++line_no) {
    if (is_blank(line)) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw MalformedRecord("corpus line has no tab between sentence and tags", line_no);
    }
    std::string text = trim(std::string_view(line).substr(0, tab));
    std::vector<std::string> tags = split_tags(std::string_view(line).substr(tab + 1));
    std::vector<std::string> tokens = tokenize(text);
    if (tags.empty() || tokens.empty()) {
      ++out.dropped_records;
      continue;
    }
    out.corpus.add(std::move(text), std::move(tokens), std::move(tags));
  }
  return out;
}

ParsedCorpus parse_corpus_file(const std::string& path) {
  return parse_file(path, [](std::istream& in) { return parse_corpus(in); });
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& rec : corpus.records()) {
    out << one_line(rec.text) << '\t';
    for (std::size_t i = 0; i < rec.tags.size(); ++i) {
      out << (i ? ", " : "") << rec.tags[i];
    }
    out << '\n';
  }
}

CategoryTree parse_category_tree(std::istream& in) {
  CategoryTree tree;
  std::string line;
  for (std::size_t line_no = 1; next_line(in, line); ++line_no) {
    const std::string content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const std::size_t colon = content.find(':');
    if (colon == std::string::npos) {
      throw MalformedTreeLine("tree line must look like \"class: tag, tag\"", line_no);
    }
    std::string name = lower(trim(std::string_view(content).substr(0, colon)));
    if (name.empty()) throw MalformedTreeLine("tree line has no class name", line_no);
    if (tree.contains(name)) throw DuplicateClass("class \"" + name + "\" repeated", line_no);
    auto tags = split_tags(std::string_view(content).substr(colon + 1));
    if (tags.empty()) throw EmptyTagList("class \"" + name + "\" lists no tags", line_no);
    tree.add_class(std::move(name), std::move(tags));
  }
  if (tree.empty()) throw MalformedTreeLine("category tree has no classes", 1);
  return tree;
}

CategoryTree parse_category_tree_file(const std::string& path) {
  return parse_file(path, [](std::istream& in) { return parse_category_tree(in); });
}

void write_category_tree(std::ostream& out, const CategoryTree& tree) {
  for (const auto& entry : tree.classes()) {
    out << entry.name << ':';
    for (std::size_t i = 0; i < entry.tags.size(); ++i) {
      out << (i ? ", " : " ") << entry.tags[i];
    }
    out << '\n';
  }
}

std::string uci_category_name(std::string_view code, std::size_t line) {
  const std::string c = lower(trim(code));
  if (c == "b") return "business";
  if (c == "t") return "technology";
  if (c == "e") return "entertainment";
  if (c == "m") return "medicine";
  throw UnknownCategoryCode("unknown UCI category code \"" + std::string(code) + "\"", line);
}

LabeledDataset parse_labeled_dataset(std::istream& in, DatasetFormat format) {
  LabeledDataset out;
  std::string line;
  std::size_t title_col = 1;
  std::size_t category_col = 4;
  char delim = ',';
  bool first = true;
  for (std::size_t line_no = 1; next_line(in, line); ++line_no) {
    if (is_blank(line)) continue;
    if (format == DatasetFormat::kTsv) {
      const std::size_t tab = line.rfind('\t');
      if (tab == std::string::npos) {
        throw MalformedRecord("dataset line has no tab before the class", line_no);
      }
      std::string sentence = trim(std::string_view(line).substr(0, tab));
      std::string label = lower(trim(std::string_view(line).substr(tab + 1)));
      if (sentence.empty() || label.empty()) {
        throw MalformedRecord("dataset line needs a sentence and a class", line_no);
      }
      out.items.push_back({std::move(sentence), std::move(label)});
      continue;
    }

    if (first) {
      // The original distribution is tab-separated, the common re-upload is
      // a quoted CSV with a header row.
      delim = line.find('\t') != std::string::npos ? '\t' : ',';
    }
    auto fields = split_delimited(line, delim, line_no);
    if (first) {
      first = false;
      if (!fields.empty() && lower(trim(fields[0])) == "id") {
        for (std::size_t i = 0; i < fields.size(); ++i) {
          const std::string name = lower(trim(fields[i]));
          if (name == "title") title_col = i;
          if (name == "category") category_col = i;
        }
        continue;
      }
    }
    if (fields.size() <= std::max(title_col, category_col)) {
      throw MalformedRecord("UCI row has too few columns", line_no);
    }
    std::string sentence = trim(fields[title_col]);
    if (sentence.empty()) throw MalformedRecord("UCI row has an empty title", line_no);
    out.items.push_back({std::move(sentence), uci_category_name(fields[category_col], line_no)});
  }
  return out;
}

LabeledDataset parse_labeled_dataset_file(const std::string& path,
                                          DatasetFormat format) {
  return parse_file(path, [format](std::istream& in) {
    return parse_labeled_dataset(in, format);
  });
}

void write_labeled_dataset_tsv(std::ostream& out, const LabeledDataset& dataset) {
  for (const auto& item : dataset.items) {
    out << one_line(item.sentence) << '\t' << item.label << '\n';
  }
}

CorpusSplit split_corpus(const Corpus& corpus, double test_fraction,
                         std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test fraction must lie strictly between 0 and 1");
  }
  CorpusSplit split;
  for (const auto& rec : corpus.records()) {
    // FNV-1a over the seed bytes, then the sentence text.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](unsigned char byte) {
      h ^= byte;
      h *= 0x100000001b3ULL;
    };
    for (int k = 0; k < 8; ++k) mix(static_cast<unsigned char>((seed >> (8 * k)) & 0xff));
    for (char ch : rec.text) mix(static_cast<unsigned char>(ch));
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    Corpus& side = u < test_fraction ? split.test : split.train;
    side.add(rec.text, rec.tokens, rec.tags);
  }
  if (split.train.empty() || split.test.empty()) {
    throw DegenerateSplit("split left the " +
                          std::string(split.train.empty() ? "train" : "test") +
                          " side empty");
  }
  split.train_tags = split.train.tag_vocabulary();
  split.test_tags = split.test.tag_vocabulary();
  for (const auto& tag : split.test_tags) {
    if (!split.train_tags.contains(tag)) split.test_only_tags.insert(tag);
  }
  return split;
}

}  // namespace zscat
