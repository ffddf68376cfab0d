#include "tadb/corpus.hpp"

#include <sstream>

#include "tadb/error.hpp"

namespace tadb {

std::string racey_source(const RaceyParams& p) {
  if (p.threads < 1 || p.threads > 6) throw Error("bad-args", "racey supports 1..6 worker threads");
  if (p.array_words < 1 || (p.array_words & (p.array_words - 1)) != 0)
    throw Error("bad-args", "racey array size must be a power of two");
  if (p.iterations < 1) throw Error("bad-args", "racey needs at least one iteration");

  const int words = p.array_words + p.threads;
  std::ostringstream s;
  s << "# RACEY-style order-sensitive workload: " << p.threads << " workers, " << p.array_words
    << "-word shared array,\n"
    << "# " << p.iterations << " iterations, one signature word per worker. g[0.." << p.array_words - 1
    << "] is the array,\n"
    << "# g[" << p.array_words << "..] the signatures. The printed XOR depends on access order.\n"
    << ".globals " << words << "\n"
    << "\n"
    << "main:\n";
  for (int k = 0; k < p.threads; ++k) {
    s << "    li r1, " << k << "\n"
      << "    spawn r" << 10 + k << ", worker\n";
  }
  for (int k = 0; k < p.threads; ++k) s << "    join r" << 10 + k << "\n";
  s << "    li r2, 0\n"
    << "    li r3, 0\n"
    << "    li r4, " << words << "\n"
    << "fold:\n"
    << "    ldg r5, [r3+0]\n"
    << "    xor r2, r2, r5\n"
    << "    addi r3, r3, 1\n"
    << "    blt r3, r4, fold\n"
    << "    print r2\n"
    << "    halt\n"
    << "\n"
    << "worker:                  # r1 = worker id\n"
    << "    li r15, " << p.array_words - 1 << "\n"
    << "    li r14, 2654435761       # 0x9E3779B1\n"
    << "    addi r3, r1, " << p.array_words << "\n"
    << "    addi r7, r1, 1\n"
    << "    stg r7, [r3+0]\n"
    << "    li r5, 0\n"
    << "    li r6, " << p.iterations << "\n"
    << "loop:\n"
    << "    ldg r7, [r3+0]\n"
    << "    and r8, r7, r15\n"
    << "    ldg r9, [r8+0]\n"
    << "    mul r7, r7, r14\n"
    << "    add r7, r7, r9\n"
    << "    stg r7, [r3+0]\n"
    << "    and r8, r7, r15\n"
    << "    ldg r9, [r8+0]\n"
    << "    mul r12, r7, r14\n"
    << "    add r12, r12, r9\n"
    << "    stg r12, [r8+0]\n"
    << "    addi r5, r5, 1\n"
    << "    blt r5, r6, loop\n"
    << "    halt\n";
  return s.str();
}

}  // namespace tadb
