#pragma once
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "agentlab/interventions.hpp"

namespace agentlab {

// Per-seed marker scalars for one evaluated condition. l75 uses +infinity as
// the above-range sentinel; optional fields are undefined until both trial
// classes (or enough samples) exist and callers impute documented defaults.
struct MarkerReport {
    double gbi = 0.0;
    double ignition_sharpness = 0.0;
    std::optional<double> auroc_t2;
    double aurc = 0.0;
    double pci_a = 0.0;
    std::optional<double> delta_pci;
    double delta_nrs = 0.0;
    double l75 = 0.0;
    double per_step_accuracy = 0.0;
    double report_accuracy = 0.0;
    double conjunction = 0.0;
    double ood_gap = 0.0;
    double eff_dim = 0.0;
};

inline constexpr double kAboveRange = std::numeric_limits<double>::infinity();

// Participation-style broadcast index over a window of slot states. Each step
// supplies the active slots' contents (zeros for empty slots). Negative slot
// similarities are clamped to zero before normalizing. Throws when the window
// is empty or fewer than two slots are active; callers apply the documented
// zero convention for no-workspace and bus-off conditions instead of calling.
double gbi(const std::vector<std::vector<Tensor>>& slots_per_step);

// Peak one-step rise of an activation-norm series (never negative).
double ignition_sharpness(const std::vector<double>& norm_series);

// Mann-Whitney pair statistic: P(conf_correct > conf_incorrect) + half ties.
// Empty input throws; a single-class input returns nullopt (impute 0.50).
std::optional<double> auroc_type2(const std::vector<double>& confidence,
                                  const std::vector<int>& correct);

struct CalibrationBin {
    double mean_confidence = 0.0;
    double accuracy = 0.0;
    int count = 0;  // 0 marks an empty bin
};
std::vector<CalibrationBin> calibration_curve(const std::vector<double>& confidence,
                                              const std::vector<int>& correct, int n_bins);

// Area under the risk-coverage curve (mean selective risk over coverage
// levels after sorting by descending confidence); lower is better.
double aurc(const std::vector<double>& confidence, const std::vector<int>& correct);

// Lempel-Ziv-76 phrase count and its c(n) log2(n) / n normalization.
int lz76_phrases(const std::vector<uint8_t>& symbols);
double lz76_normalized(const std::vector<uint8_t>& symbols);

struct PulseSpec {
    double sigma = 0.25;  // magnitude of the one-step latent pulse
    int step = 8;         // pulse injection step
    int record = 16;      // post-pulse steps entering the complexity measure
};

struct PciTrial {
    double complexity = 0.0;
    bool correct = false;  // all report windows answered correctly on the pulsed trial
};

// Perturbational complexity: pulse the agent's probe latent, binarize the
// post-pulse trajectory per dimension against its pre-pulse median, and
// compress with LZ76. One entry per episode.
std::vector<PciTrial> pci_a_trials(Agent& agent, const TaskConfig& task, int episodes,
                                   uint64_t seed, const PulseSpec& pulse = {});
double pci_a(const std::vector<PciTrial>& trials);

// Mean complexity on correct trials minus incorrect ones; nullopt when only
// one class is present.
std::optional<double> delta_pci(const std::vector<PciTrial>& trials);

// Cross-validated linear-decoder AUC minus the mean shuffled-label AUC over
// identical splits (k folds, n_shuffles shuffles). Features are row-major
// n x d; labels are 0/1 with at least min_per_class members each.
double delta_nrs(const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
                 int k_folds, int n_shuffles, uint64_t seed, int min_per_class = 20);

// Pooled held-out AUC of a k-fold ridge-logistic probe (shared by delta_nrs
// and the PCA baseline).
double probe_auc(const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
                 int k_folds, uint64_t seed);

// Cue-axis construction: normalized difference between the mean workspace
// content at cue-present steps and the grand mean over the calibration pool.
// Throws when the difference is degenerate (zero norm).
Tensor cue_direction(const std::vector<Tensor>& cue_present, const std::vector<Tensor>& pool);

// Projection of per-step workspace content onto the cue axis. Zero content
// maps to exactly zero signal.
std::vector<double> cue_signal_trace(const std::vector<Tensor>& content_per_step,
                                     const Tensor& direction);

// First downward 0.75 crossing of a titration curve [(sigma, accuracy)],
// linearly interpolated; +infinity when accuracy never drops below 0.75.
// The curve must start at sigma = 0 with accuracy >= 0.75 and be sorted.
double l75(const std::vector<std::pair<double, double>>& curve);

// Participation ratio (sum lambda)^2 / sum lambda^2 of the sample covariance.
double effective_dim(const std::vector<std::vector<double>>& samples, int min_samples = 100);

// Project features onto their top principal components and probe correctness
// with the shared cross-validated logistic decoder.
double pca_probe_baseline(const std::vector<std::vector<double>>& features,
                          const std::vector<int>& correct, int target_dim, int k_folds,
                          uint64_t seed);

// Symmetric eigendecomposition by cyclic Jacobi rotations; eigenvalues are
// returned in descending order with matching columns in `vectors` (row-major
// d x d, one eigenvector per column index).
struct EigenSym {
    std::vector<double> values;
    std::vector<double> vectors;
};
EigenSym eigen_sym(std::vector<double> matrix, int d);

}  // namespace agentlab
