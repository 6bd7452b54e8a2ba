#pragma once

// WordPiece (greedy longest match) and byte-level BPE tokenizers.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace credscan {

// Pre-split class shared by both tokenizers: whitespace plus
//   ! " # $ % & ' ( ) * + , - . / : ; < = > ? @ [ \ ] ^ _ ` { | } ~
bool is_split_punctuation(unsigned char ch);

// Splits `text` into words: whitespace separates, each punctuation byte is
// its own word.
std::vector<std::string> presplit_words(std::string_view text);

struct WordPieceVocab {
  std::unordered_map<std::string, std::int64_t> token_to_id;
  std::string unk_token = "[UNK]";
  std::string continuation_prefix = "##";
  std::size_t max_chars_per_word = 100;

  // Ids follow list order. Adds unk_token at the end if absent. Throws
  // DomainError on duplicate tokens.
  static WordPieceVocab from_tokens(const std::vector<std::string>& tokens);

  bool contains(std::string_view token) const { return token_to_id.count(std::string(token)) > 0; }
};

// Throws DomainError if unk_token is missing or ids are not unique.
void validate(const WordPieceVocab& vocab);

// One token per line, id = 0-based line index. Trailing '\r' is stripped.
WordPieceVocab load_wordpiece_vocab(const std::string& path);

// Greedy longest-prefix decomposition of each pre-split word. Words longer
// than max_chars_per_word (in code points) or with an unmatchable remainder
// become the unk token.
std::vector<std::string> wordpiece_tokenize(std::string_view text, const WordPieceVocab& vocab);

// Joins pieces: continuation tokens attach to the previous token, others are
// separated by one space. Throws DomainError on a token not in the vocab.
std::string wordpiece_detokenize(const std::vector<std::string>& tokens, const WordPieceVocab& vocab);

// Byte <-> printable code point bijection used in byte-level token strings.
// Bytes in '!'..'~', 0xA1..0xAC and 0xAE..0xFF map to themselves; the
// remaining 68 bytes map, in ascending order, to U+0100 onward. The space
// byte therefore shows up as U+0120 'Ġ'.
char32_t byte_to_symbol(unsigned char byte);
// Returns -1 when the code point is not in the image of the mapping.
int symbol_to_byte(char32_t symbol);

// Encodes raw bytes as the UTF-8 text of their mapped symbols.
std::string bytes_to_symbols(std::string_view bytes);

struct BpeModel {
  // rank = index
  std::vector<std::pair<std::string, std::string>> merges;
  std::unordered_map<std::string, std::int64_t> token_to_id;

  // Builds the vocabulary: 256 byte symbols (ids 0..255 in byte order), then
  // one token per merge (id 256 + rank). Throws DomainError if a merge part
  // is not derivable from the byte alphabet and earlier merges, or a merge
  // repeats.
  static BpeModel from_merges(std::vector<std::pair<std::string, std::string>> merges);

  std::size_t merge_count() const { return merges.size(); }
  // Rank of the pair, or -1.
  std::int64_t rank_of(const std::string& left, const std::string& right) const;

 private:
  std::unordered_map<std::string, std::int64_t> pair_rank_;
};

// Header line (ignored), then one "left right" pair per line.
BpeModel load_bpe_merges(const std::string& path);
void save_bpe_merges(const BpeModel& model, const std::string& path);

// Pre-tokenizes at whitespace boundaries: a single ' ' directly before a
// non-whitespace run joins that run's chunk; other whitespace forms chunks
// of its own. Each chunk starts as its byte symbols and the lowest-ranked
// adjacent pair is merged until none applies.
std::vector<std::string> byte_bpe_tokenize(std::string_view text, const BpeModel& model);

// Exact inverse of byte_bpe_tokenize. Throws DomainError on a token that is
// not in the model's vocabulary.
std::string byte_bpe_detokenize(const std::vector<std::string>& tokens, const BpeModel& model);

// Learns `num_merges` merges from `corpus` by repeatedly merging the most
// frequent adjacent pair (ties: lexicographically smallest pair). Stops early
// when no pair occurs at least twice. Intended for fixtures.
BpeModel learn_bpe_merges(const std::vector<std::string>& corpus, std::size_t num_merges);

// Splits UTF-8 into code points; invalid bytes become single-byte units.
std::vector<std::string_view> utf8_units(std::string_view text);

}  // namespace credscan
