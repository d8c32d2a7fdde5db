#include "zscat/embedding_store.h"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "zscat/errors.h"

namespace zscat {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    if (end > pos) fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

bool parse_double(std::string_view s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_count(std::string_view s, std::size_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

EmbeddingStore load_text(std::istream& in) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (split_fields(line).empty()) continue;
    lines.push_back(std::move(line));
  }
  if (lines.empty()) throw MalformedEmbeddingFile("embedding file is empty");

  std::size_t first = 0;
  {
    // A word2vec-style "count dim" header is only taken as such when the next
    // line agrees with it; "3 2" alone could also be a one-dimensional entry.
    const auto head = split_fields(lines[0]);
    std::size_t count = 0;
    std::size_t dim = 0;
    if (head.size() == 2 && parse_count(head[0], count) &&
        parse_count(head[1], dim) && dim > 1 &&
        (lines.size() == 1 || split_fields(lines[1]).size() == dim + 1)) {
      first = 1;
    }
  }
  if (first == lines.size()) {
    throw MalformedEmbeddingFile("embedding file has a header but no entries");
  }

  const std::size_t dim = split_fields(lines[first]).size() - 1;
  if (dim == 0) {
    throw MalformedEmbeddingFile("line " + std::to_string(first + 1) +
                                 ": word without a vector");
  }
  EmbeddingStore store(dim);
  Vector values(dim);
  for (std::size_t n = first; n < lines.size(); ++n) {
    const auto fields = split_fields(lines[n]);
    if (fields.size() != dim + 1) {
      throw MalformedEmbeddingFile(
          "line " + std::to_string(n + 1) + ": expected " + std::to_string(dim) +
          " values, found " + std::to_string(fields.size() - 1));
    }
    for (std::size_t k = 0; k < dim; ++k) {
      if (!parse_double(fields[k + 1], values[k])) {
        throw MalformedEmbeddingFile("line " + std::to_string(n + 1) +
                                     ": cannot parse \"" +
                                     std::string(fields[k + 1]) + "\"");
      }
    }
    store.add(std::string(fields[0]), values);
  }
  return store;
}

EmbeddingStore load_binary(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) {
    throw MalformedEmbeddingFile("binary embedding file has no header");
  }
  const auto fields = split_fields(header);
  std::size_t count = 0;
  std::size_t dim = 0;
  if (fields.size() != 2 || !parse_count(fields[0], count) ||
      !parse_count(fields[1], dim) || dim == 0) {
    throw MalformedEmbeddingFile("binary embedding header must be \"count dim\"");
  }

  EmbeddingStore store(dim);
  Vector values(dim);
  std::vector<unsigned char> raw(4 * dim);
  for (std::size_t n = 0; n < count; ++n) {
    std::string word;
    int ch = in.get();
    while (ch == '\n' || ch == '\r') ch = in.get();
    while (ch != std::char_traits<char>::eof() && ch != ' ') {
      word.push_back(static_cast<char>(ch));
      ch = in.get();
    }
    if (ch == std::char_traits<char>::eof() || word.empty()) {
      throw MalformedEmbeddingFile("binary record " + std::to_string(n + 1) +
                                   ": truncated word");
    }
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
      throw MalformedEmbeddingFile("binary record " + std::to_string(n + 1) +
                                   ": truncated vector");
    }
    for (std::size_t k = 0; k < dim; ++k) {
      const std::uint32_t bits = std::uint32_t{raw[4 * k]} |
                                 (std::uint32_t{raw[4 * k + 1]} << 8) |
                                 (std::uint32_t{raw[4 * k + 2]} << 16) |
                                 (std::uint32_t{raw[4 * k + 3]} << 24);
      values[k] = static_cast<double>(std::bit_cast<float>(bits));
      if (!std::isfinite(values[k])) {
        throw MalformedEmbeddingFile("binary record " + std::to_string(n + 1) +
                                     ": non-finite value");
      }
    }
    store.add(std::move(word), values);
  }
  return store;
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::size_t dim, OovPolicy policy)
    : dim_(dim), policy_(policy) {
  if (dim == 0) throw std::invalid_argument("embedding dimension must be >= 1");
}

bool EmbeddingStore::add(std::string word, std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw ShapeMismatch("embedding for \"" + word + "\" has " +
                        std::to_string(vector.size()) + " values, store has " +
                        std::to_string(dim_));
  }
  if (index_.contains(word)) return false;
  index_.emplace(word, words_.size());
  words_.push_back(std::move(word));
  data_.insert(data_.end(), vector.begin(), vector.end());
  return true;
}

std::optional<std::size_t> EmbeddingStore::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingStore load_embeddings(std::istream& in, EmbeddingFormat format) {
  return format == EmbeddingFormat::kText ? load_text(in) : load_binary(in);
}

EmbeddingStore load_embeddings_file(const std::string& path,
                                    std::optional<EmbeddingFormat> format) {
  if (!format) {
    const bool binary = path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
    format = binary ? EmbeddingFormat::kWord2VecBinary : EmbeddingFormat::kText;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embeddings file " + path);
  return load_embeddings(in, *format);
}

void write_embeddings_text(std::ostream& out, const EmbeddingStore& store) {
  std::ostringstream line;
  line.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t id = 0; id < store.size(); ++id) {
    line.str("");
    line << store.word(id);
    for (double x : store.vector(id)) line << ' ' << x;
    line << '\n';
    out << line.str();
  }
}

void write_embeddings_binary(std::ostream& out, const EmbeddingStore& store) {
  out << store.size() << ' ' << store.dim() << '\n';
  std::vector<char> raw(4 * store.dim());
  for (std::size_t id = 0; id < store.size(); ++id) {
    out << store.word(id) << ' ';
    const auto vec = store.vector(id);
    for (std::size_t k = 0; k < vec.size(); ++k) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(vec[k]));
      for (int b = 0; b < 4; ++b) raw[4 * k + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
    out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
    out << '\n';
  }
}

SentenceMatrix embed_sequence(const EmbeddingStore& store,
                              const TokenSequence& seq) {
  SentenceMatrix m{Tensor2(seq.length(), store.dim()), 0, {}};
  m.word_ids.reserve(seq.length());
  for (std::size_t t = 0; t < seq.length(); ++t) {
    const auto id = store.find(seq[t]);
    m.word_ids.push_back(id);
    if (!id) {
      ++m.oov_count;  // kSkip cannot drop rows here, so it zero-fills as well
      continue;
    }
    const auto vec = store.vector(*id);
    std::copy(vec.begin(), vec.end(), m.values.row(t).begin());
  }
  return m;
}

TagEmbedding embed_tag(const EmbeddingStore& store, std::string_view tag) {
  TagEmbedding out{Vector(store.dim(), 0.0)};
  std::size_t used = 0;
  for (const auto& word : tokenize(tag)) {
    const auto id = store.find(word);
    if (!id) continue;
    const auto vec = store.vector(*id);
    for (std::size_t k = 0; k < vec.size(); ++k) out.values[k] += vec[k];
    ++used;
  }
  if (used == 0) throw AllWordsOutOfVocabulary(std::string(tag));
  for (double& x : out.values) x /= static_cast<double>(used);
  return out;
}

}  // namespace zscat
