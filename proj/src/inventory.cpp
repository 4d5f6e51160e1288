#include "artic/feat/inventory.hpp"

#include <algorithm>

namespace artic::feat {

namespace {

// The 39-symbol folded ARPABET set.
const char* kPhonemes[] = {
    "aa", "ae", "ah", "ao", "aw", "ay", "b",  "ch", "d",  "dh", "eh", "er", "ey",
    "f",  "g",  "hh", "ih", "iy", "jh", "k",  "l",  "m",  "n",  "ng", "ow", "oy",
    "p",  "r",  "s",  "sh", "t",  "th", "uh", "uw", "v",  "w",  "y",  "z",  "zh"};

}  // namespace

PhonemeInventory::PhonemeInventory() {
  symbols_.reserve(kSize);
  symbols_.push_back(kStartToken);
  for (const char* p : kPhonemes) symbols_.push_back(p);
}

const PhonemeInventory& PhonemeInventory::instance() {
  static const PhonemeInventory inv;
  return inv;
}

int PhonemeInventory::index(const std::string& symbol) const {
  auto it = std::find(symbols_.begin(), symbols_.end(), symbol);
  if (it == symbols_.end())
    throw DataError("unknown phoneme '" + symbol + "' (expected one of the 39 ARPABET symbols)");
  return static_cast<int>(it - symbols_.begin());
}

bool PhonemeInventory::contains(const std::string& symbol) const {
  return std::find(symbols_.begin(), symbols_.end(), symbol) != symbols_.end();
}

const std::string& PhonemeInventory::symbol(int index) const {
  if (index < 0 || index >= kSize)
    throw DimensionError("phoneme index " + std::to_string(index) + " out of range");
  return symbols_[static_cast<std::size_t>(index)];
}

std::vector<std::string> PhonemeInventory::phonemes() const {
  return {symbols_.begin() + 1, symbols_.end()};
}

}  // namespace artic::feat
