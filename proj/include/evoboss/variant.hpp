// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace evoboss {

// One-letter amino-acid codes in the fixed ordering used for all indexing.
inline constexpr std::string_view kAlphabet = "ACDEFGHIKLMNPQRSTVWY";
inline constexpr int kAlphabetSize = 20;

// Largest word length whose index still fits comfortably in 64 bits.
inline constexpr int kMaxVariantLength = 14;

// Position of a residue letter in kAlphabet, or -1.
int residue_rank(char residue);

std::uint64_t space_size(int n);

// A point of the combinatorial sequence space: the residues at the n mutated
// positions. The index is the rank of the word in lexicographic order over
// kAlphabet, so encode and decode are a bijection on the 20^n words.
class Variant {
 public:
  Variant() = default;

  // Throws DataError on empty words, illegal letters, or over-long words.
  static Variant from_word(std::string_view word);
  static Variant from_index(std::uint64_t index, int n);

  const std::string& word() const { return word_; }
  std::uint64_t index() const { return index_; }
  int length() const { return static_cast<int>(word_.size()); }
  char operator[](std::size_t position) const { return word_[position]; }

  // Copy with one residue replaced.
  Variant with_residue(int position, char residue) const;

  friend bool operator==(const Variant& a, const Variant& b) { return a.word_ == b.word_; }
  friend std::strong_ordering operator<=>(const Variant& a, const Variant& b) {
    if (auto c = a.word_.size() <=> b.word_.size(); c != 0) return c;
    return a.index_ <=> b.index_;
  }

 private:
  std::string word_;
  std::uint64_t index_ = 0;
};

int hamming(const Variant& a, const Variant& b);

}  // namespace evoboss
