#pragma once

#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "ucf/trainer.hpp"

namespace ucf::acceptance {

// Tolerances and budgets, fixed here so that no caller can loosen them.
inline constexpr double kReferenceTolerance = 0.01;        // criteria 1, 2: relative
inline constexpr double kGradcheckTolerance = 1e-4;        // criterion 4
inline constexpr double kFusionMarginPoints = 0.10;        // criterion 5
inline constexpr std::size_t kSeeds = 5;                   // criteria 5, 6, 7
inline constexpr double kSoftmaxSumTolerance = 1e-12;      // criterion 8
inline constexpr double kGateLowerBound = 0.268;           // criterion 8
inline constexpr double kGateUpperBound = 0.732;           // criterion 8
inline constexpr double kLossOracleTolerance = 1e-10;      // criterion 9
inline constexpr double kLog2 = 0.6931471806;
inline constexpr double kLog4 = 1.3862943611;

// Wall-clock budget per criterion in seconds.
inline constexpr double kBudgetSeconds[10] = {0, 1, 1, 1, 120, 900, 1200, 900, 60, 1};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Small model on the default synthetic data used by the training criteria.
RunConfig desk_config();

// Trains each distinct config once; later requests for the same config and
// seed reuse the stored run.
class RunCache {
 public:
  const TrainRun& get(const RunConfig& config);
  std::size_t size() const { return runs_.size(); }

 private:
  std::map<std::string, TrainRun> runs_;
};

struct Options {
  std::vector<int> only;          // empty means all nine
  std::ostream* progress = nullptr;
};

CriterionResult run_criterion(int id, RunCache& cache, std::ostream* progress = nullptr);
std::vector<CriterionResult> run_all(const Options& options = {});

// "PASS 3 <title> (<seconds> s): <detail>"
std::string format(const CriterionResult& r);

}  // namespace ucf::acceptance
