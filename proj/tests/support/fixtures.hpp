#pragma once

#include <string>
#include <vector>

#include "tadb/debugger.hpp"

namespace tadb::testing {

std::string corpus_path(const std::string& name);
std::string corpus(const std::string& name);
std::string golden_path(const std::string& name);

// Corpus programs used by the equivalence and replay properties, as
// (name, program text) pairs. RACEY is included at a reduced iteration count.
std::vector<std::pair<std::string, std::string>> corpus_programs();

// Drive a session to ProgramExit or Deadlock, carrying on past traps.
// Each returns the final stop.
StopReason cont_to_end(Debugger& d);
StopReason step_to_end(Debugger& d, std::size_t limit = 5'000'000);
// Repeated sync_step; a Blocked focus is unblocked with a single step(),
// which hands focus to the thread that commits next.
StopReason sync_step_to_end(Debugger& d, std::size_t limit = 5'000'000);

// Threads, globals and locks equal; output equal as a multiset ordered by
// (clock, tid), since prints are local and stepping may run them in a
// different host order.
bool same_final_state(const Machine& a, const Machine& b, std::string* why = nullptr);

}  // namespace tadb::testing
