#pragma once

// Hand-labeled projects for the smell detectors: each case says whether one
// detector should fire on the project.

#include <string>
#include <vector>

#include "blockscope/model.hpp"
#include "blockscope/smells.hpp"

namespace testsupport {

struct LabeledSmellCase {
  std::string name;
  blockscope::SmellKind detector;
  bool positive = false;
  blockscope::Project project;
};

std::vector<LabeledSmellCase> labeled_smell_corpus();

// Whether the detector fires on the case's project.
bool detector_fires(const LabeledSmellCase& c);

}  // namespace testsupport
