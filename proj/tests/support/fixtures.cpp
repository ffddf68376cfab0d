#include "support/fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "tadb/corpus.hpp"

namespace tadb::testing {

std::string corpus_path(const std::string& name) { return std::string(TADB_CORPUS_DIR) + "/" + name; }
std::string golden_path(const std::string& name) { return std::string(TADB_GOLDEN_DIR) + "/" + name; }

std::string corpus(const std::string& name) {
  std::ifstream in(corpus_path(name), std::ios::binary);
  if (!in) throw std::runtime_error("missing corpus file " + name);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::pair<std::string, std::string>> corpus_programs() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const char* name : {"fig2.tasm", "alpha.tasm", "fig6.tasm", "single.tasm", "locks.tasm", "deadlock.tasm"})
    out.emplace_back(name, corpus(name));
  out.emplace_back("racey(2,16,40)", racey_source({2, 16, 40}));
  out.emplace_back("racey(3,8,15)", racey_source({3, 8, 15}));
  return out;
}

namespace {

bool finished(const StopReason& s) { return s.kind == StopKind::ProgramExit || s.kind == StopKind::Deadlock; }

}  // namespace

StopReason cont_to_end(Debugger& d) {
  for (;;) {
    auto s = d.cont();
    if (finished(s)) return s;
    if (s.kind != StopKind::Trap) throw std::runtime_error("cont_to_end: unexpected stop " + std::string(to_string(s.kind)));
  }
}

StopReason step_to_end(Debugger& d, std::size_t limit) {
  for (std::size_t i = 0; i < limit; ++i) {
    auto s = d.step();
    if (finished(s)) return s;
  }
  throw std::runtime_error("step_to_end: step limit reached");
}

StopReason sync_step_to_end(Debugger& d, std::size_t limit) {
  for (std::size_t i = 0; i < limit; ++i) {
    auto s = d.sync_step();
    if (s.kind == StopKind::Blocked) s = d.step();
    if (finished(s)) return s;
  }
  throw std::runtime_error("sync_step_to_end: limit reached");
}

bool same_final_state(const Machine& a, const Machine& b, std::string* why) {
  auto fail = [&](const char* what) {
    if (why) *why = what;
    return false;
  };
  if (a.threads() != b.threads()) return fail("threads differ");
  if (a.globals() != b.globals()) return fail("globals differ");
  if (a.locks() != b.locks()) return fail("locks differ");
  auto key = [](const OutputRecord& o) { return std::tie(o.clock, o.tid, o.value); };
  auto oa = a.output(), ob = b.output();
  auto by = [&](const OutputRecord& x, const OutputRecord& y) { return key(x) < key(y); };
  std::sort(oa.begin(), oa.end(), by);
  std::sort(ob.begin(), ob.end(), by);
  if (oa != ob) return fail("output differs");
  return true;
}

}  // namespace tadb::testing
