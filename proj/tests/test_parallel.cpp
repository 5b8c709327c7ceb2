#include <gtest/gtest.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "fmpair/parallel.hpp"

using namespace fmpair;

TEST(Parallel, ResultsIndexedByPosition) {
  for (unsigned w : {1u, 3u, 16u}) {
    std::vector<std::size_t> out(100, 0);
    parallel_for(out.size(), w, [&](std::size_t i) { out[i] = i * i; });
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], i * i);
  }
}

TEST(Parallel, RethrowsLowestFailingIndex) {
  for (unsigned w : {1u, 4u}) {
    try {
      parallel_for(50, w, [](std::size_t i) {
        if (i == 7 || i == 31) throw std::runtime_error(std::to_string(i));
      });
      FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "7");
    }
  }
}

TEST(Parallel, EmptyRange) {
  int calls = 0;
  parallel_for(0, 4, [&](std::size_t) { ++calls; });
  EXPECT_EQ(calls, 0);
}
