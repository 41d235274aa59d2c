#include "neurocrf/evaluation.hpp"

#include <algorithm>
#include <sstream>

#include "neurocrf/numeric_text.hpp"
#include "neurocrf/training.hpp"

namespace neurocrf {

CalibrationModel fit_calibration(std::span<const double> self_scores,
                                 std::span<const double> nonself_scores) {
  if (self_scores.empty() || nonself_scores.empty()) {
    throw std::invalid_argument("calibration needs both self and non-self scores");
  }
  const double n = static_cast<double>(self_scores.size() + nonself_scores.size());
  double sum_s = 0.0;
  for (double s : self_scores) sum_s += s;
  for (double s : nonself_scores) sum_s += s;
  const double mean_s = sum_s / n;
  const double mean_y = static_cast<double>(self_scores.size()) / n;

  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  auto accumulate = [&](std::span<const double> scores, double y) {
    for (double s : scores) {
      const double ds = s - mean_s;
      const double dy = y - mean_y;
      sxx += ds * ds;
      sxy += ds * dy;
      syy += dy * dy;
    }
  };
  accumulate(self_scores, 1.0);
  accumulate(nonself_scores, 0.0);

  if (sxx == 0.0) throw DegenerateFitError("all scores are identical; no threshold exists");
  if (sxy == 0.0) throw DegenerateFitError("scores carry no class information; slope is zero");

  CalibrationModel model;
  model.slope = sxy / sxx;
  model.intercept = mean_y - model.slope * mean_s;
  model.threshold = (0.5 - model.intercept) / model.slope;
  model.r_square = std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return model;
}

ErrorRates frr_far(std::span<const double> self_scores, std::span<const double> nonself_scores,
                   const CalibrationModel& calibration) {
  if (calibration.slope == 0.0) throw std::invalid_argument("calibration slope is zero");
  std::size_t rejected = 0;
  for (double s : self_scores) rejected += calibration.accepts(s) ? 0 : 1;
  std::size_t accepted = 0;
  for (double s : nonself_scores) accepted += calibration.accepts(s) ? 1 : 0;
  ErrorRates rates;
  if (!self_scores.empty()) {
    rates.frr = 100.0 * static_cast<double>(rejected) / static_cast<double>(self_scores.size());
  }
  if (!nonself_scores.empty()) {
    rates.far = 100.0 * static_cast<double>(accepted) / static_cast<double>(nonself_scores.size());
  }
  return rates;
}

double accuracy_from_rates(double frr, double far) { return 100.0 - (frr + far) / 2.0; }

double token_accuracy(std::span<const std::vector<LabelIndex>> decoded,
                      std::span<const std::vector<LabelIndex>> gold) {
  if (decoded.size() != gold.size()) {
    throw std::invalid_argument("decoded and gold sequence counts differ");
  }
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (decoded[i].size() != gold[i].size()) {
      throw std::invalid_argument("decoded and gold sequence lengths differ");
    }
    for (std::size_t t = 0; t < gold[i].size(); ++t) correct += decoded[i][t] == gold[i][t] ? 1 : 0;
    total += gold[i].size();
  }
  if (total == 0) throw std::invalid_argument("token accuracy of an empty sequence set");
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

double f_score(double accuracy, double token_accuracy) {
  const double a = accuracy / 100.0;
  const double b = token_accuracy / 100.0;
  if (a + b == 0.0) throw std::invalid_argument("f_score undefined when both rates are zero");
  return 2.0 * a * b / (a + b);
}

ModelEvaluation evaluate_model_detailed(const NeuroCrfModel& model,
                                        std::span<const LabeledSequence> self_test,
                                        std::span<const LabeledSequence> nonself_test) {
  if (self_test.empty() || nonself_test.empty()) {
    throw std::invalid_argument("evaluation needs non-empty self and non-self test sets");
  }
  ModelEvaluation eval;
  std::vector<std::vector<LabelIndex>> decoded;
  std::vector<std::vector<LabelIndex>> gold;
  decoded.reserve(self_test.size());
  gold.reserve(self_test.size());
  for (const auto& seq : self_test) {
    SequenceScore s = score_sequence(model, seq.observations);
    eval.self_scores.push_back(s.score);
    decoded.push_back(std::move(s.labels));
    gold.push_back(seq.labels);
  }
  for (const auto& seq : nonself_test) {
    eval.nonself_scores.push_back(score_sequence(model, seq.observations).score);
  }

  MetricsReport& m = eval.metrics;
  try {
    eval.calibration = fit_calibration(eval.self_scores, eval.nonself_scores);
    const ErrorRates rates = frr_far(eval.self_scores, eval.nonself_scores, eval.calibration);
    m.frr = rates.frr;
    m.far = rates.far;
    m.r_square = eval.calibration.r_square;
  } catch (const DegenerateFitError&) {
    m.degenerate = true;
    m.frr = 0.0;
    m.far = 100.0;
    m.r_square = 0.0;
  }
  m.accuracy = accuracy_from_rates(m.frr, m.far);
  m.token_accuracy = token_accuracy(decoded, gold);
  m.f_score = m.accuracy + m.token_accuracy > 0.0 ? f_score(m.accuracy, m.token_accuracy) : 0.0;
  return eval;
}

MetricsReport evaluate_model(const NeuroCrfModel& model, std::span<const LabeledSequence> self_test,
                             std::span<const LabeledSequence> nonself_test) {
  return evaluate_model_detailed(model, self_test, nonself_test).metrics;
}

std::string metrics_csv_header() {
  return "model_id,architecture,frr,far,accuracy,r_square,token_accuracy,f_score";
}

std::string to_csv_row(const std::string& model_id, Architecture arch,
                       const MetricsReport& report) {
  std::ostringstream out;
  out << model_id << ',' << to_string(arch) << ',' << format_double(report.frr) << ','
      << format_double(report.far) << ',' << format_double(report.accuracy) << ','
      << format_double(report.r_square) << ',' << format_double(report.token_accuracy) << ','
      << format_double(report.f_score);
  return out.str();
}

}  // namespace neurocrf
