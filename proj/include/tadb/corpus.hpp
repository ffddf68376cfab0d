#pragma once

#include <string>

namespace tadb {

struct RaceyParams {
  int threads = 2;        // 1..6
  int array_words = 16;   // power of two
  int iterations = 1000;
};

// Guest source for the RACEY-style workload: each worker repeatedly mixes its
// signature word with shared array words (mix(a, b) = a * 0x9E3779B1 + b,
// wrapping) and writes mixed values back; main prints the XOR of every
// signature and array word. The printed value depends on the interleaving.
std::string racey_source(const RaceyParams& params = {});

}  // namespace tadb
