#include "artic/corpus/split.hpp"

#include <algorithm>
#include <cmath>

#include "artic/num/rng.hpp"

namespace artic::corpus {

std::map<std::string, Split> split_dataset(const Corpus& corpus,
                                           std::array<double, 3> ratios,
                                           std::uint64_t seed) {
  if (corpus.utterances.size() < 10)
    throw DataError("split_dataset: need at least 10 utterances, got " +
                    std::to_string(corpus.utterances.size()));
  const double rsum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(rsum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");

  // group ids per subject, in stable sorted order
  std::map<std::string, std::vector<std::string>> by_subject;
  for (const auto& u : corpus.utterances) by_subject[u.subject].push_back(u.id);

  std::map<std::string, Split> out;
  std::uint64_t subject_index = 0;
  for (auto& [subject, ids] : by_subject) {
    std::sort(ids.begin(), ids.end());
    num::Rng rng(num::mix_seed(seed, subject_index++));
    // Fisher-Yates with our own integer mapping, for cross-platform stability
    for (std::size_t i = ids.size(); i > 1; --i)
      std::swap(ids[i - 1], ids[rng.uniform_int(i)]);

    const auto n = ids.size();
    auto n_train = static_cast<std::size_t>(std::llround(ratios[0] * static_cast<double>(n)));
    auto n_val = static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(n)));
    n_train = std::min(n_train, n);
    n_val = std::min(n_val, n - n_train);
    for (std::size_t i = 0; i < n; ++i) {
      Split s = i < n_train               ? Split::kTrain
                : i < n_train + n_val     ? Split::kValidation
                                          : Split::kTest;
      out[ids[i]] = s;
    }
  }
  return out;
}

}  // namespace artic::corpus
