#include "lightcorners/split.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "lightcorners/errors.hpp"
#include "lightcorners/noise.hpp"

namespace lightcorners {

SplitResult split(const std::vector<LightAnnotation>& annotations, double train_fraction, std::uint64_t seed) {
  require(train_fraction > 0.0 && train_fraction < 1.0, ErrorKind::Config, "train fraction must lie in (0, 1)");
  std::array<std::vector<std::size_t>, 4> by_type;
  for (std::size_t i = 0; i < annotations.size(); ++i) by_type[index_of(annotations[i].light_type)].push_back(i);

  SplitResult out;
  std::size_t stratified = 0;
  for (auto type : kLightTypes) {
    auto& members = by_type[index_of(type)];
    if (members.size() >= 2) {
      stratified += members.size();
    } else if (!members.empty()) {
      out.warnings.push_back("light type " + std::string(short_name(type)) +
                             " has fewer than 2 records; all placed in train");
      out.train.insert(out.train.end(), members.begin(), members.end());
      members.clear();
    }
  }

  // Largest-remainder apportionment of the test share over the types.
  const double test_fraction = 1.0 - train_fraction;
  const auto target_total = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(stratified)));
  std::array<std::size_t, 4> test_count{};
  std::array<double, 4> remainder{};
  std::size_t assigned = 0;
  for (int t = 0; t < 4; ++t) {
    const double exact = test_fraction * static_cast<double>(by_type[t].size());
    test_count[t] = static_cast<std::size_t>(std::floor(exact));
    remainder[t] = exact - static_cast<double>(test_count[t]);
    assigned += test_count[t];
  }
  std::array<int, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (int t : order) {
    if (assigned >= target_total) break;
    if (by_type[t].empty()) continue;
    ++test_count[t];
    ++assigned;
  }

  for (int t = 0; t < 4; ++t) {
    auto members = by_type[t];
    if (members.empty()) continue;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::shuffle(members.begin(), members.end(), rng);
    // keep both sides non-empty for stratified types
    const std::size_t n_test = std::clamp<std::size_t>(test_count[t], 1, members.size() - 1);
    out.test.insert(out.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.insert(out.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace lightcorners
