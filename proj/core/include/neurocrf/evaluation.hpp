#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "neurocrf/model.hpp"
#include "neurocrf/types.hpp"

namespace neurocrf {

/// No threshold exists: every score is identical, or the fitted slope is zero.
class DegenerateFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least-squares line of class value (self = 1, non-self = 0) on raw score.
/// The threshold is the score where the line crosses 0.5.
struct CalibrationModel {
  double slope = 0.0;
  double intercept = 0.0;
  double threshold = 0.0;
  double r_square = 0.0;

  /// Scores exactly at the threshold are accepted.
  bool accepts(double score) const noexcept {
    return slope > 0.0 ? score >= threshold : score <= threshold;
  }
};

CalibrationModel fit_calibration(std::span<const double> self_scores,
                                 std::span<const double> nonself_scores);

struct ErrorRates {
  double frr = 0.0;  // percent of self rejected
  double far = 0.0;  // percent of non-self accepted
};

ErrorRates frr_far(std::span<const double> self_scores, std::span<const double> nonself_scores,
                   const CalibrationModel& calibration);

/// 100 - (frr + far) / 2, i.e. the equal-error operating point at the fitted threshold.
double accuracy_from_rates(double frr, double far);

/// Percent of positions whose decoded label equals the gold label, pooled.
double token_accuracy(std::span<const std::vector<LabelIndex>> decoded,
                      std::span<const std::vector<LabelIndex>> gold);

/// Harmonic mean of accuracy/100 and token_accuracy/100.
double f_score(double accuracy, double token_accuracy);

struct MetricsReport {
  double frr = 0.0;
  double far = 0.0;
  double accuracy = 0.0;
  double r_square = 0.0;
  double token_accuracy = 0.0;
  double f_score = 0.0;
  /// Set when calibration had no threshold; then every sequence is accepted.
  bool degenerate = false;
};

/// Scores, calibration and metrics for one model.
struct ModelEvaluation {
  MetricsReport metrics;
  CalibrationModel calibration;
  std::vector<double> self_scores;
  std::vector<double> nonself_scores;
};

/// Calibration is fitted on the same scores it is evaluated on.
ModelEvaluation evaluate_model_detailed(const NeuroCrfModel& model,
                                        std::span<const LabeledSequence> self_test,
                                        std::span<const LabeledSequence> nonself_test);

MetricsReport evaluate_model(const NeuroCrfModel& model, std::span<const LabeledSequence> self_test,
                             std::span<const LabeledSequence> nonself_test);

/// model-id,architecture,frr,far,accuracy,r_square,token_accuracy,f_score
std::string metrics_csv_header();
std::string to_csv_row(const std::string& model_id, Architecture arch,
                       const MetricsReport& report);

}  // namespace neurocrf
