#pragma once

#include <string>
#include <vector>

#include "artic/common.hpp"

namespace artic::feat {

// 39 ARPABET phonemes plus the start token at index 0; 40 entries total.
class PhonemeInventory {
 public:
  static const PhonemeInventory& instance();

  static constexpr int kSize = 40;
  static constexpr int kStartIndex = 0;
  static constexpr const char* kStartToken = "<s>";

  int index(const std::string& symbol) const;  // throws DataError on unknown symbol
  bool contains(const std::string& symbol) const;
  const std::string& symbol(int index) const;
  const std::vector<std::string>& symbols() const { return symbols_; }
  // phonemes only (no start token)
  std::vector<std::string> phonemes() const;

 private:
  PhonemeInventory();
  std::vector<std::string> symbols_;
};

}  // namespace artic::feat
