#pragma once

// Hand-written SimDial policy used as a reference program.

#include "dilog/extract.hpp"
#include "dilog/pipeline.hpp"

namespace golden {

inline dilog::PolicyProgram simdial_program() {
  const dilog::PolicyConfig config = dilog::simdial_policy_config();
  dilog::PolicyProgram p;
  p.frame = config.frame;
  p.auxiliary = config.program.auxiliary;
  p.background = config.background();
  p.forward_steps = config.program.forward_steps;
  auto add = [&](int slot, const char* text) {
    const dilog::Clause c = dilog::parse_clause(text);
    p.entries.push_back({c.head().predicate, slot, c, 1.0, true});
  };
  add(0, "sys_request(V0) <- member_usr(V0), unknown(V0)");
  add(0, "sys_inform(V0) <- kb_return(V0)");
  add(0, "sys_query(V0) <- request(V0), pred3(V0)");
  add(1, "sys_query(V0) <- request(V0), pred3(V0)");
  add(0, "pred2() <- all(V0), usr_slots(V0)");
  add(0, "pred3(V0) <- pred2(), unknown(V0)");
  return p;
}

}  // namespace golden
