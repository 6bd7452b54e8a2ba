#include "credscan/tokenizers.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include "credscan/error.h"

namespace credscan {
namespace {

bool is_space(unsigned char ch) { return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\v' || ch == '\f'; }

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

// Length of the UTF-8 sequence starting at s[i], or 1 for an invalid byte.
std::size_t utf8_length_at(std::string_view s, std::size_t i) {
  const auto lead = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  if (lead >= 0xF0 && lead <= 0xF4) {
    len = 4;
  } else if (lead >= 0xE0) {
    len = 3;
  } else if (lead >= 0xC2 && lead <= 0xDF) {
    len = 2;
  }
  if (lead >= 0xF5 || (lead >= 0x80 && lead < 0xC2)) return 1;
  if (i + len > s.size()) return 1;
  for (std::size_t k = 1; k < len; ++k) {
    if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return 1;
  }
  return len;
}

char32_t decode_utf8(std::string_view unit) {
  const auto b0 = static_cast<unsigned char>(unit[0]);
  switch (unit.size()) {
    case 1: return b0;
    case 2: return (char32_t(b0 & 0x1F) << 6) | (unit[1] & 0x3F);
    case 3: return (char32_t(b0 & 0x0F) << 12) | (char32_t(unit[1] & 0x3F) << 6) | (unit[2] & 0x3F);
    default:
      return (char32_t(b0 & 0x07) << 18) | (char32_t(unit[1] & 0x3F) << 12) | (char32_t(unit[2] & 0x3F) << 6) |
             (unit[3] & 0x3F);
  }
}

struct ByteTable {
  std::array<char32_t, 256> to_symbol{};
  std::array<std::string, 256> to_utf8{};
};

const ByteTable& byte_table() {
  static const ByteTable table = [] {
    ByteTable t;
    char32_t next = 256;
    for (int b = 0; b < 256; ++b) {
      const bool printable = (b >= '!' && b <= '~') || (b >= 0xA1 && b <= 0xAC) || (b >= 0xAE && b <= 0xFF);
      t.to_symbol[static_cast<std::size_t>(b)] = printable ? static_cast<char32_t>(b) : next++;
    }
    for (std::size_t b = 0; b < 256; ++b) t.to_utf8[b] = encode_utf8(t.to_symbol[b]);
    return t;
  }();
  return table;
}

// Whitespace chunking with the leading-space convention.
std::vector<std::string_view> bpe_chunks(std::string_view text) {
  std::vector<std::string_view> chunks;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    if (is_space(static_cast<unsigned char>(text[i]))) {
      std::size_t j = i;
      while (j < text.size() && is_space(static_cast<unsigned char>(text[j]))) ++j;
      const bool word_follows = j < text.size();
      if (word_follows && text[j - 1] == ' ') {
        if (j - 1 > start) chunks.push_back(text.substr(start, j - 1 - start));
        std::size_t k = j;
        while (k < text.size() && !is_space(static_cast<unsigned char>(text[k]))) ++k;
        chunks.push_back(text.substr(j - 1, k - (j - 1)));
        i = k;
      } else {
        chunks.push_back(text.substr(start, j - start));
        i = j;
      }
    } else {
      while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
      chunks.push_back(text.substr(start, i - start));
    }
  }
  return chunks;
}

std::vector<std::string> chunk_symbols(std::string_view chunk) {
  const auto& table = byte_table();
  std::vector<std::string> syms;
  syms.reserve(chunk.size());
  for (unsigned char b : chunk) syms.push_back(table.to_utf8[b]);
  return syms;
}

void merge_pair(std::vector<std::string>& syms, const std::string& left, const std::string& right) {
  std::vector<std::string> out;
  out.reserve(syms.size());
  for (std::size_t i = 0; i < syms.size(); ++i) {
    if (i + 1 < syms.size() && syms[i] == left && syms[i + 1] == right) {
      out.push_back(left + right);
      ++i;
    } else {
      out.push_back(std::move(syms[i]));
    }
  }
  syms = std::move(out);
}

std::string pair_key(const std::string& left, const std::string& right) {
  std::string key;
  key.reserve(left.size() + right.size() + 1);
  key += left;
  key += '\x01';  // never produced by the byte mapping
  key += right;
  return key;
}

}  // namespace

bool is_split_punctuation(unsigned char ch) {
  return (ch >= 33 && ch <= 47) || (ch >= 58 && ch <= 64) || (ch >= 91 && ch <= 96) || (ch >= 123 && ch <= 126);
}

std::vector<std::string_view> utf8_units(std::string_view text) {
  std::vector<std::string_view> units;
  for (std::size_t i = 0; i < text.size();) {
    const std::size_t len = utf8_length_at(text, i);
    units.push_back(text.substr(i, len));
    i += len;
  }
  return units;
}

std::vector<std::string> presplit_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (unsigned char ch : text) {
    if (is_space(ch)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else if (is_split_punctuation(ch)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
      words.emplace_back(1, static_cast<char>(ch));
    } else {
      current.push_back(static_cast<char>(ch));
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

WordPieceVocab WordPieceVocab::from_tokens(const std::vector<std::string>& tokens) {
  WordPieceVocab vocab;
  for (const auto& t : tokens) {
    const auto id = static_cast<std::int64_t>(vocab.token_to_id.size());
    if (!vocab.token_to_id.emplace(t, id).second) throw DomainError("duplicate vocabulary token '" + t + "'");
  }
  if (!vocab.contains(vocab.unk_token)) {
    vocab.token_to_id.emplace(vocab.unk_token, static_cast<std::int64_t>(vocab.token_to_id.size()));
  }
  return vocab;
}

void validate(const WordPieceVocab& vocab) {
  if (!vocab.contains(vocab.unk_token)) throw DomainError("vocabulary lacks the unk token " + vocab.unk_token);
  std::set<std::int64_t> ids;
  for (const auto& [token, id] : vocab.token_to_id) {
    if (!ids.insert(id).second) throw DomainError("vocabulary id " + std::to_string(id) + " is not unique");
  }
  if (vocab.max_chars_per_word == 0) throw DomainError("max_chars_per_word must be positive");
}

WordPieceVocab load_wordpiece_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocabulary: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  auto vocab = WordPieceVocab::from_tokens(tokens);
  validate(vocab);
  return vocab;
}

std::vector<std::string> wordpiece_tokenize(std::string_view text, const WordPieceVocab& vocab) {
  std::vector<std::string> out;
  for (const auto& word : presplit_words(text)) {
    const auto units = utf8_units(word);
    if (units.size() > vocab.max_chars_per_word) {
      out.push_back(vocab.unk_token);
      continue;
    }
    std::vector<std::string> pieces;
    bool bad = false;
    std::size_t start = 0;
    while (start < units.size()) {
      std::size_t end = units.size();
      std::string match;
      while (start < end) {
        const std::size_t byte_begin = static_cast<std::size_t>(units[start].data() - word.data());
        const std::size_t byte_end = static_cast<std::size_t>(units[end - 1].data() - word.data()) + units[end - 1].size();
        std::string piece = word.substr(byte_begin, byte_end - byte_begin);
        if (start > 0) piece = vocab.continuation_prefix + piece;
        if (vocab.contains(piece)) {
          match = std::move(piece);
          break;
        }
        --end;
      }
      if (match.empty()) {
        bad = true;
        break;
      }
      pieces.push_back(std::move(match));
      start = end;
    }
    if (bad) {
      out.push_back(vocab.unk_token);
    } else {
      out.insert(out.end(), pieces.begin(), pieces.end());
    }
  }
  return out;
}

std::string wordpiece_detokenize(const std::vector<std::string>& tokens, const WordPieceVocab& vocab) {
  std::string out;
  const auto& prefix = vocab.continuation_prefix;
  for (const auto& t : tokens) {
    if (!vocab.contains(t)) throw DomainError("token not in vocabulary: '" + t + "'");
    if (!prefix.empty() && t.size() > prefix.size() && t.compare(0, prefix.size(), prefix) == 0) {
      out += t.substr(prefix.size());
    } else {
      if (!out.empty()) out += ' ';
      out += t;
    }
  }
  return out;
}

char32_t byte_to_symbol(unsigned char byte) { return byte_table().to_symbol[byte]; }

int symbol_to_byte(char32_t symbol) {
  static const std::map<char32_t, int> inverse = [] {
    std::map<char32_t, int> m;
    for (int b = 0; b < 256; ++b) m[byte_table().to_symbol[static_cast<std::size_t>(b)]] = b;
    return m;
  }();
  const auto it = inverse.find(symbol);
  return it == inverse.end() ? -1 : it->second;
}

std::string bytes_to_symbols(std::string_view bytes) {
  std::string out;
  for (unsigned char b : bytes) out += byte_table().to_utf8[b];
  return out;
}

BpeModel BpeModel::from_merges(std::vector<std::pair<std::string, std::string>> merges) {
  BpeModel model;
  const auto& table = byte_table();
  for (std::size_t b = 0; b < 256; ++b) model.token_to_id.emplace(table.to_utf8[b], static_cast<std::int64_t>(b));
  for (std::size_t rank = 0; rank < merges.size(); ++rank) {
    const auto& [left, right] = merges[rank];
    if (!model.token_to_id.count(left) || !model.token_to_id.count(right)) {
      throw DomainError("merge " + std::to_string(rank) + " ('" + left + "' '" + right +
                        "') uses a symbol not derivable from earlier merges");
    }
    if (!model.pair_rank_.emplace(pair_key(left, right), static_cast<std::int64_t>(rank)).second) {
      throw DomainError("merge " + std::to_string(rank) + " repeats an earlier pair");
    }
    model.token_to_id.emplace(left + right, static_cast<std::int64_t>(256 + rank));
  }
  model.merges = std::move(merges);
  return model;
}

std::int64_t BpeModel::rank_of(const std::string& left, const std::string& right) const {
  const auto it = pair_rank_.find(pair_key(left, right));
  return it == pair_rank_.end() ? -1 : it->second;
}

BpeModel load_bpe_merges(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open merges file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("merges file lacks a header line", 1);
  std::vector<std::pair<std::string, std::string>> merges;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos || sp == 0 || sp + 1 >= line.size() || line.find(' ', sp + 1) != std::string::npos) {
      throw ParseError("expected 'left right'", line_no);
    }
    merges.emplace_back(line.substr(0, sp), line.substr(sp + 1));
  }
  return BpeModel::from_merges(std::move(merges));
}

void save_bpe_merges(const BpeModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write merges file: " + path);
  out << "#version: 0.2\n";
  for (const auto& [l, r] : model.merges) out << l << ' ' << r << '\n';
}

std::vector<std::string> byte_bpe_tokenize(std::string_view text, const BpeModel& model) {
  std::vector<std::string> out;
  for (std::string_view chunk : bpe_chunks(text)) {
    auto syms = chunk_symbols(chunk);
    while (syms.size() > 1) {
      std::int64_t best = -1;
      std::size_t best_at = 0;
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
        const auto r = model.rank_of(syms[i], syms[i + 1]);
        if (r >= 0 && (best < 0 || r < best)) {
          best = r;
          best_at = i;
        }
      }
      if (best < 0) break;
      const std::string left = syms[best_at];
      const std::string right = syms[best_at + 1];
      merge_pair(syms, left, right);
    }
    for (auto& s : syms) out.push_back(std::move(s));
  }
  return out;
}

std::string byte_bpe_detokenize(const std::vector<std::string>& tokens, const BpeModel& model) {
  std::string out;
  for (const auto& t : tokens) {
    if (!model.token_to_id.count(t)) throw DomainError("token not in vocabulary: '" + t + "'");
    for (std::string_view unit : utf8_units(t)) {
      const int b = symbol_to_byte(decode_utf8(unit));
      if (b < 0) throw DomainError("token holds a symbol outside the byte alphabet: '" + t + "'");
      out.push_back(static_cast<char>(b));
    }
  }
  return out;
}

BpeModel learn_bpe_merges(const std::vector<std::string>& corpus, std::size_t num_merges) {
  std::map<std::string, std::size_t> chunk_freq;
  for (const auto& doc : corpus) {
    for (std::string_view chunk : bpe_chunks(doc)) ++chunk_freq[std::string(chunk)];
  }
  std::vector<std::pair<std::vector<std::string>, std::size_t>> words;
  for (const auto& [chunk, freq] : chunk_freq) words.emplace_back(chunk_symbols(chunk), freq);

  std::vector<std::pair<std::string, std::string>> merges;
  while (merges.size() < num_merges) {
    std::map<std::pair<std::string, std::string>, std::size_t> pair_freq;
    for (const auto& [syms, freq] : words) {
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) pair_freq[{syms[i], syms[i + 1]}] += freq;
    }
    const std::pair<std::string, std::string>* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& [pair, count] : pair_freq) {  // map order = lexicographic tie-break
      if (count > best_count) {
        best = &pair;
        best_count = count;
      }
    }
    if (!best || best_count < 2) break;
    const auto chosen = *best;
    merges.push_back(chosen);
    for (auto& [syms, freq] : words) merge_pair(syms, chosen.first, chosen.second);
  }
  return BpeModel::from_merges(std::move(merges));
}

}  // namespace credscan
