#include <algorithm>
#include <random>
#include <set>

#include "fluency/error.hpp"
#include "fluency/harness.hpp"
#include "fluency/io.hpp"

namespace fluency {
namespace {

// Unbiased draw in [0, bound); std::uniform_int_distribution is not
// portable across standard libraries.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::mt19937_64::max() - (std::mt19937_64::max() % bound);
  std::uint64_t value;
  do {
    value = rng();
  } while (value >= limit);
  return value % bound;
}

}  // namespace

DatasetSplit split_dataset(std::span<const std::string> ids, SplitSizes sizes, std::uint64_t seed) {
  const std::size_t requested = sizes.train + sizes.dev + sizes.test;
  if (requested > ids.size() || requested < sizes.train) {
    fail(ErrorCode::kSizesExceedDataset, "split sizes sum to " + std::to_string(requested) +
                                             " but the dataset has " + std::to_string(ids.size()));
  }
  std::vector<std::string> order(ids.begin(), ids.end());
  std::sort(order.begin(), order.end());
  require(std::adjacent_find(order.begin(), order.end()) == order.end(), ErrorCode::kDuplicateId,
          "split ids must be unique");

  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[draw_below(rng, i)]);
  }

  DatasetSplit split;
  split.seed = seed;
  auto take = [&, pos = std::size_t{0}](std::size_t count) mutable {
    std::vector<std::string> part(order.begin() + static_cast<long>(pos),
                                  order.begin() + static_cast<long>(pos + count));
    pos += count;
    return part;
  };
  split.train = take(sizes.train);
  split.dev = take(sizes.dev);
  split.test = take(sizes.test);
  return split;
}

std::string DatasetSplit::serialize() const {
  std::string out = "#split v1 seed=" + std::to_string(seed) + "\n";
  auto emit = [&](const std::vector<std::string>& ids, const char* part) {
    for (const auto& id : ids) out += id + "\t" + part + "\n";
  };
  emit(train, "train");
  emit(dev, "dev");
  emit(test, "test");
  return out;
}

DatasetSplit DatasetSplit::parse(std::string_view text) {
  const auto lines = io::split_lines(text);
  constexpr std::string_view kHeader = "#split v1 seed=";
  if (lines.empty() || !std::string_view(lines[0]).starts_with(kHeader)) {
    fail(ErrorCode::kFormatError, "missing '#split v1 seed=' header");
  }
  DatasetSplit split;
  try {
    std::size_t used = 0;
    const std::string digits = lines[0].substr(kHeader.size());
    split.seed = std::stoull(digits, &used);
    if (used != digits.size() || digits.front() == '-') throw std::invalid_argument("");
  } catch (const std::exception&) {
    fail(ErrorCode::kFormatError, "bad split seed");
  }
  std::set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = io::split(lines[i], '\t');
    if (fields.size() != 2 || fields[0].empty()) {
      fail(ErrorCode::kFormatError, "split line " + std::to_string(i + 1) + ": expected id<TAB>part");
    }
    std::string id(fields[0]);
    if (!seen.insert(id).second) fail(ErrorCode::kDuplicateId, "split lists '" + id + "' twice");
    if (fields[1] == "train") {
      split.train.push_back(std::move(id));
    } else if (fields[1] == "dev") {
      split.dev.push_back(std::move(id));
    } else if (fields[1] == "test") {
      split.test.push_back(std::move(id));
    } else {
      fail(ErrorCode::kFormatError, "split line " + std::to_string(i + 1) + ": unknown part");
    }
  }
  return split;
}

}  // namespace fluency
