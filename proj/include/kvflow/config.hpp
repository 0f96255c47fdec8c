#pragma once

#include <string>

#include "kvflow/flow.hpp"
#include "kvflow/initial.hpp"
#include "kvflow/manifold.hpp"

namespace kvflow {

struct OutputConfig {
  std::string directory = "out";
  bool snapshot_final = true;
};

struct OperatorConfig {
  int spectrum_count = 12;  // modes the spectrum subcommand reports; 0 = all
  double kernel_tol = 0.0;  // 0 uses the operator default
};

struct RunConfig {
  std::string path;  // source file, echoed into the output directory
  ManifoldSpec manifold;
  FlowConfig flow;
  InitialSpec initial;
  OutputConfig output;
  OperatorConfig op;
};

// Sectioned key-value text: [manifold] [flow] [initial] [output] [operator],
// "key = value" lines, '#' comments. Unknown sections or keys are errors that
// name the offender; repeated keys are errors except the term1..termN list.
RunConfig parse_config(const std::string& path);

}  // namespace kvflow
