#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "malab/corpus.hpp"
#include "malab/models.hpp"

namespace malab {

/// Topic areas the harness is allowed to cover. Every registered check names one.
const std::vector<std::string>& in_scope_topics();

struct CheckInfo {
    std::string id;
    std::string topic;     ///< entry of in_scope_topics()
    std::string citation;  ///< statement being checked, in words
    bool fitted = false;   ///< constant fitted on one half of the instances, verified on the other
};

/// Every registered check, in execution order.
const std::vector<CheckInfo>& check_registry();
/// Throws Error when a check's topic is not in scope or an id repeats.
void validate_registry();
const CheckInfo& check_info(const std::string& id);
std::vector<std::string> all_check_ids();

struct CheckReport {
    std::string id;
    std::string citation;
    int instances = 0;
    int failures = 0;
    /// Smallest relative margin (bound - value) / |bound| over the instances; +inf when none ran.
    double worst_margin = 0.0;
    /// Fitted constant, when the check fits one.
    double fitted_constant = 0.0;
    std::string detail;
    bool passed() const { return failures == 0; }
};

struct VerifyOptions {
    std::vector<double> p_values{1.0, 2.0};
    int pair_count = 500;
    /// Violations count only beyond this relative slack.
    double slack = 1e-7;
    /// Chains for the continuity checks beyond those in the corpus.
    int extra_chains = 0;
    int chain_length = 5;
    /// Safety factor applied to constants fitted on the first half.
    double fit_margin = 2.0;
    std::uint64_t pair_seed = 0;
};

/// Runs the named checks (registry order is kept). Unknown ids throw InvalidInput.
std::vector<CheckReport> run_checks(const Corpus& corpus, const KahlerModel& model,
                                    const std::vector<std::string>& ids,
                                    const VerifyOptions& options = {});

/// Fitted-constant protocol: C = margin * max over `fit` of value / scale; the
/// held-out instances fail when value > C * scale (with slack).
struct HeldOutFit {
    double constant = 0.0;
    int instances = 0;
    int failures = 0;
    double worst_margin = kInf;
};
HeldOutFit held_out_fit(const std::vector<double>& values, const std::vector<double>& scales,
                        double margin, double slack);

/// Relative margin (bound - value) / max(|bound|, tiny), -inf when value is infinite and bound is not.
double relative_margin(double bound, double value);

/// JUnit-style XML for a list of reports.
std::string junit_xml(const std::vector<CheckReport>& reports, const std::string& suite_name);
/// CSV: id,citation,instances,failures,worst_margin,fitted_constant,status.
std::string reports_csv(const std::vector<CheckReport>& reports);

}  // namespace malab
