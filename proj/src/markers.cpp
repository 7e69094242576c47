#include "agentlab/markers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace agentlab {

double gbi(const std::vector<std::vector<Tensor>>& slots_per_step) {
    if (slots_per_step.empty()) throw std::invalid_argument("broadcast index: empty window");
    constexpr double kEps = 1e-8;
    double acc = 0.0;
    long cnt = 0;
    for (const auto& slots : slots_per_step) {
        const int k = static_cast<int>(slots.size());
        if (k < 2) throw std::invalid_argument("broadcast index needs at least two active slots");
        for (int i = 0; i < k; ++i) {
            double row_sum = 0.0;
            std::vector<double> a(k, 0.0);
            for (int j = 0; j < k; ++j) {
                if (j == i) continue;
                double dot = 0.0;
                const auto& wi = slots[i].data;
                const auto& wj = slots[j].data;
                if (wi.size() != wj.size())
                    throw std::invalid_argument("broadcast index: slot dims differ");
                for (size_t d = 0; d < wi.size(); ++d) dot += wi[d] * wj[d];
                a[j] = std::max(0.0, dot);
                row_sum += a[j];
            }
            double p = 1.0;
            for (int j = 0; j < k; ++j) {
                const double share = a[j] / (row_sum + kEps);
                p -= share * share;
            }
            acc += p;
            ++cnt;
        }
    }
    return acc / static_cast<double>(cnt);
}

double ignition_sharpness(const std::vector<double>& norm_series) {
    if (norm_series.size() < 2)
        throw std::invalid_argument("ignition sharpness needs at least two steps");
    double best = 0.0;
    for (size_t t = 1; t < norm_series.size(); ++t)
        best = std::max(best, norm_series[t] - norm_series[t - 1]);
    return best;
}

namespace {

// Mann-Whitney statistic with midranks for ties. nullopt when one class is
// missing.
std::optional<double> rank_auc(const std::vector<double>& score, const std::vector<int>& label) {
    const size_t n = score.size();
    size_t n_pos = 0;
    for (int y : label) n_pos += y ? 1 : 0;
    const size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return score[a] < score[b]; });
    double rank_pos = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && score[idx[j]] == score[idx[i]]) ++j;
        const double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (size_t k = i; k < j; ++k)
            if (label[idx[k]]) rank_pos += mid;
        i = j;
    }
    const double u = rank_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

void check_conf_pairs(const std::vector<double>& confidence, const std::vector<int>& correct,
                      const char* who) {
    if (confidence.empty()) throw std::invalid_argument(std::string(who) + ": empty input");
    if (confidence.size() != correct.size())
        throw std::invalid_argument(std::string(who) + ": size mismatch");
}

}  // namespace

std::optional<double> auroc_type2(const std::vector<double>& confidence,
                                  const std::vector<int>& correct) {
    check_conf_pairs(confidence, correct, "type-2 auroc");
    return rank_auc(confidence, correct);
}

std::vector<CalibrationBin> calibration_curve(const std::vector<double>& confidence,
                                              const std::vector<int>& correct, int n_bins) {
    check_conf_pairs(confidence, correct, "calibration curve");
    if (n_bins < 2) throw std::invalid_argument("calibration curve: need at least two bins");
    std::vector<CalibrationBin> bins(n_bins);
    for (size_t i = 0; i < confidence.size(); ++i) {
        const double c = std::clamp(confidence[i], 0.0, 1.0);
        int b = std::min(static_cast<int>(c * n_bins), n_bins - 1);
        bins[b].mean_confidence += c;
        bins[b].accuracy += correct[i] ? 1.0 : 0.0;
        bins[b].count += 1;
    }
    for (auto& b : bins) {
        if (b.count == 0) continue;
        b.mean_confidence /= b.count;
        b.accuracy /= b.count;
    }
    return bins;
}

double aurc(const std::vector<double>& confidence, const std::vector<int>& correct) {
    check_conf_pairs(confidence, correct, "risk-coverage area");
    const size_t n = confidence.size();
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](size_t a, size_t b) { return confidence[a] > confidence[b]; });
    double errors = 0.0, area = 0.0;
    for (size_t k = 0; k < n; ++k) {
        errors += correct[idx[k]] ? 0.0 : 1.0;
        area += errors / static_cast<double>(k + 1);
    }
    return area / static_cast<double>(n);
}

int lz76_phrases(const std::vector<uint8_t>& symbols) {
    const int n = static_cast<int>(symbols.size());
    if (n == 0) throw std::invalid_argument("lz76: empty sequence");
    if (n == 1) return 1;
    // Kaspar-Schuster scan: extend the current phrase while it reproduces from
    // the prefix, start a new phrase otherwise.
    int c = 1, l = 1, i = 0, k = 1, kmax = 1;
    while (true) {
        if (symbols[i + k - 1] == symbols[l + k - 1]) {
            ++k;
            if (l + k > n) {
                ++c;
                break;
            }
        } else {
            kmax = std::max(kmax, k);
            ++i;
            if (i == l) {
                ++c;
                l += kmax;
                if (l + 1 > n) break;
                i = 0;
                k = 1;
                kmax = 1;
            } else {
                k = 1;
            }
        }
    }
    return c;
}

double lz76_normalized(const std::vector<uint8_t>& symbols) {
    const double n = static_cast<double>(symbols.size());
    if (n < 2.0) return 0.0;
    return static_cast<double>(lz76_phrases(symbols)) * std::log2(n) / n;
}

std::vector<PciTrial> pci_a_trials(Agent& agent, const TaskConfig& task, int episodes,
                                   uint64_t seed, const PulseSpec& pulse) {
    if (episodes <= 0) throw std::invalid_argument("perturbation probe: need episodes > 0");
    if (pulse.step < 1 || pulse.record < 1 || pulse.sigma < 0.0)
        throw std::invalid_argument("perturbation probe: bad pulse spec");
    Graph g(&agent.params());
    GridEnv env(task);
    std::vector<PciTrial> trials;
    trials.reserve(episodes);
    for (int e = 0; e < episodes; ++e) {
        Rng env_rng(hash_tags(seed, {0x9c1aULL, static_cast<uint64_t>(e)}));
        Rng pulse_rng(hash_tags(seed, {0x9c1bULL, static_cast<uint64_t>(e)}));
        EvalOverrides ov;
        ov.pulse_sigma = pulse.sigma;
        ov.pulse_step = pulse.step;
        ov.pulse_rng = &pulse_rng;
        EpisodeRecord rec = run_episode_autonomous(agent, g, env, env_rng, ov);
        if (rec.length() < 8)
            throw std::runtime_error("perturbation probe: trajectory shorter than 8 steps");
        if (rec.length() <= pulse.step + pulse.record)
            throw std::runtime_error("perturbation probe: episode shorter than the pulse window");
        const int dim = rec.steps[0].pci_latent.numel();
        if (dim == 0) throw std::runtime_error("perturbation probe: agent exposes no probe latent");
        // binarize each dimension of the post-pulse window against its
        // pre-pulse median, then compress the dimension-major bit string
        std::vector<uint8_t> bits;
        bits.reserve(static_cast<size_t>(dim) * pulse.record);
        std::vector<double> pre(pulse.step);
        for (int d = 0; d < dim; ++d) {
            for (int t = 0; t < pulse.step; ++t) pre[t] = rec.steps[t].pci_latent.data[d];
            std::sort(pre.begin(), pre.end());
            const int m = pulse.step;
            const double median = m % 2 ? pre[m / 2] : 0.5 * (pre[m / 2 - 1] + pre[m / 2]);
            for (int t = pulse.step + 1; t <= pulse.step + pulse.record; ++t)
                bits.push_back(rec.steps[t].pci_latent.data[d] > median ? 1 : 0);
        }
        trials.push_back({lz76_normalized(bits), rec.conjunction_correct()});
    }
    return trials;
}

double pci_a(const std::vector<PciTrial>& trials) {
    if (trials.empty()) throw std::invalid_argument("perturbation probe: no trials");
    double s = 0.0;
    for (const auto& t : trials) s += t.complexity;
    return s / static_cast<double>(trials.size());
}

std::optional<double> delta_pci(const std::vector<PciTrial>& trials) {
    double sc = 0.0, si = 0.0;
    long nc = 0, ni = 0;
    for (const auto& t : trials) {
        if (t.correct) {
            sc += t.complexity;
            ++nc;
        } else {
            si += t.complexity;
            ++ni;
        }
    }
    if (nc == 0 || ni == 0) return std::nullopt;
    return sc / nc - si / ni;
}

namespace {

// Solve A x = b for symmetric positive definite A (in-place Cholesky).
std::vector<double> chol_solve(std::vector<double> a, std::vector<double> b, int d) {
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[i * d + j];
            for (int k = 0; k < j; ++k) s -= a[i * d + k] * a[j * d + k];
            if (i == j) {
                if (s <= 0.0) throw std::runtime_error("linear probe: normal matrix not SPD");
                a[i * d + i] = std::sqrt(s);
            } else {
                a[i * d + j] = s / a[j * d + j];
            }
        }
    }
    for (int i = 0; i < d; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= a[i * d + k] * b[k];
        b[i] = s / a[i * d + i];
    }
    for (int i = d - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < d; ++k) s -= a[k * d + i] * b[k];
        b[i] = s / a[i * d + i];
    }
    return b;
}

// Ridge-logistic fit by iteratively reweighted least squares over the listed
// rows; returns weights with the bias appended last.
std::vector<double> logistic_fit(const std::vector<std::vector<double>>& x,
                                 const std::vector<int>& y, const std::vector<size_t>& rows,
                                 double ridge) {
    const int d = static_cast<int>(x[0].size()) + 1;
    std::vector<double> w(d, 0.0);
    std::vector<double> xi(d);
    for (int iter = 0; iter < 30; ++iter) {
        std::vector<double> h(static_cast<size_t>(d) * d, 0.0), grad(d, 0.0);
        // the bias stays unpenalized so the probe is exactly invariant to
        // feature translation and rotation
        for (int i = 0; i < d - 1; ++i) {
            h[i * d + i] = ridge;
            grad[i] = -ridge * w[i];
        }
        h[static_cast<size_t>(d - 1) * d + (d - 1)] = 1e-12;
        for (size_t r : rows) {
            for (int i = 0; i < d - 1; ++i) xi[i] = x[r][i];
            xi[d - 1] = 1.0;
            double z = 0.0;
            for (int i = 0; i < d; ++i) z += w[i] * xi[i];
            const double p = 1.0 / (1.0 + std::exp(-z));
            const double v = std::max(p * (1.0 - p), 1e-9);
            const double res = (y[r] ? 1.0 : 0.0) - p;
            for (int i = 0; i < d; ++i) {
                grad[i] += res * xi[i];
                const double vi = v * xi[i];
                for (int j = 0; j <= i; ++j) h[i * d + j] += vi * xi[j];
            }
        }
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) h[i * d + j] = h[j * d + i];
        std::vector<double> delta = chol_solve(std::move(h), grad, d);
        double shift = 0.0;
        for (int i = 0; i < d; ++i) {
            w[i] += delta[i];
            shift += delta[i] * delta[i];
        }
        if (shift < 1e-16) break;
    }
    return w;
}

// Stratified, seeded fold assignment: per-class shuffle then round-robin.
std::vector<int> make_folds(const std::vector<int>& labels, int k_folds, uint64_t seed) {
    std::vector<size_t> pos, neg;
    for (size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
    Rng rng(hash_tags(seed, {0xf01d5ULL}));
    auto shuffle_idx = [&](std::vector<size_t>& v) {
        for (size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[rng.uniform_int(0, static_cast<int>(i) - 1)]);
    };
    shuffle_idx(pos);
    shuffle_idx(neg);
    std::vector<int> fold(labels.size(), 0);
    int next = 0;
    for (size_t i : pos) fold[i] = next++ % k_folds;
    for (size_t i : neg) fold[i] = next++ % k_folds;
    return fold;
}

// Mean of per-fold held-out AUCs. Pooling scores across folds would bias the
// estimate (a held-out label is not independent of the other folds'
// classifiers), so each fold is scored on its own and single-class test folds
// are skipped.
double probe_auc_folds(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                       const std::vector<int>& fold, int k_folds) {
    double total = 0.0;
    int counted = 0;
    for (int f = 0; f < k_folds; ++f) {
        std::vector<size_t> train_rows;
        for (size_t i = 0; i < x.size(); ++i)
            if (fold[i] != f) train_rows.push_back(i);
        if (train_rows.empty() || train_rows.size() == x.size()) continue;
        std::vector<double> w = logistic_fit(x, y, train_rows, 1e-3);
        const int d = static_cast<int>(x[0].size());
        std::vector<double> scores;
        std::vector<int> held;
        for (size_t i = 0; i < x.size(); ++i) {
            if (fold[i] != f) continue;
            double z = w[d];
            for (int j = 0; j < d; ++j) z += w[j] * x[i][j];
            scores.push_back(z);
            held.push_back(y[i]);
        }
        std::optional<double> auc = rank_auc(scores, held);
        if (!auc) continue;
        total += *auc;
        ++counted;
    }
    return counted > 0 ? total / counted : 0.5;
}

void check_probe_input(const std::vector<std::vector<double>>& features,
                       const std::vector<int>& labels, int k_folds) {
    if (features.empty()) throw std::invalid_argument("linear probe: empty feature matrix");
    if (features.size() != labels.size())
        throw std::invalid_argument("linear probe: feature/label size mismatch");
    if (k_folds < 2) throw std::invalid_argument("linear probe: need at least two folds");
    if (features.size() < static_cast<size_t>(k_folds))
        throw std::invalid_argument("linear probe: fewer samples than folds");
    const size_t d = features[0].size();
    if (d == 0) throw std::invalid_argument("linear probe: zero-width features");
    for (const auto& row : features)
        if (row.size() != d) throw std::invalid_argument("linear probe: ragged feature matrix");
}

}  // namespace

double probe_auc(const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
                 int k_folds, uint64_t seed) {
    check_probe_input(features, labels, k_folds);
    std::vector<int> fold = make_folds(labels, k_folds, seed);
    return probe_auc_folds(features, labels, fold, k_folds);
}

double delta_nrs(const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
                 int k_folds, int n_shuffles, uint64_t seed, int min_per_class) {
    check_probe_input(features, labels, k_folds);
    if (n_shuffles < 1) throw std::invalid_argument("decoder contrast: need shuffles >= 1");
    long n_pos = 0;
    for (int y : labels) n_pos += y ? 1 : 0;
    const long n_neg = static_cast<long>(labels.size()) - n_pos;
    if (n_pos < min_per_class || n_neg < min_per_class)
        throw std::runtime_error("decoder contrast: class starved below the sample floor");
    std::vector<int> fold = make_folds(labels, k_folds, seed);
    const double real = probe_auc_folds(features, labels, fold, k_folds);
    Rng rng(hash_tags(seed, {0x5affULL}));
    std::vector<int> shuffled = labels;
    double base = 0.0;
    for (int s = 0; s < n_shuffles; ++s) {
        for (size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[rng.uniform_int(0, static_cast<int>(i) - 1)]);
        base += probe_auc_folds(features, shuffled, fold, k_folds);
    }
    return real - base / n_shuffles;
}

Tensor cue_direction(const std::vector<Tensor>& cue_present, const std::vector<Tensor>& pool) {
    if (cue_present.empty() || pool.empty())
        throw std::invalid_argument("cue direction: empty calibration set");
    const int d = cue_present[0].numel();
    Tensor dir = Tensor::zeros({d});
    for (const auto& t : cue_present) {
        if (t.numel() != d) throw std::invalid_argument("cue direction: dims differ");
        for (int i = 0; i < d; ++i) dir.data[i] += t.data[i];
    }
    for (auto& v : dir.data) v /= static_cast<double>(cue_present.size());
    Tensor grand = Tensor::zeros({d});
    for (const auto& t : pool) {
        if (t.numel() != d) throw std::invalid_argument("cue direction: dims differ");
        for (int i = 0; i < d; ++i) grand.data[i] += t.data[i];
    }
    for (int i = 0; i < d; ++i) dir.data[i] -= grand.data[i] / static_cast<double>(pool.size());
    double norm = 0.0;
    for (double v : dir.data) norm += v * v;
    norm = std::sqrt(norm);
    if (norm < 1e-9) throw std::runtime_error("cue direction: degenerate reference");
    for (auto& v : dir.data) v /= norm;
    return dir;
}

std::vector<double> cue_signal_trace(const std::vector<Tensor>& content_per_step,
                                     const Tensor& direction) {
    std::vector<double> trace;
    trace.reserve(content_per_step.size());
    for (const auto& c : content_per_step) {
        if (c.numel() != direction.numel())
            throw std::invalid_argument("cue trace: content/direction dims differ");
        double dot = 0.0;
        for (int i = 0; i < c.numel(); ++i) dot += c.data[i] * direction.data[i];
        trace.push_back(dot);
    }
    return trace;
}

double l75(const std::vector<std::pair<double, double>>& curve) {
    if (curve.empty()) throw std::invalid_argument("titration threshold: empty curve");
    if (curve.front().first != 0.0)
        throw std::invalid_argument("titration threshold: curve must start at zero perturbation");
    for (size_t i = 1; i < curve.size(); ++i)
        if (curve[i].first <= curve[i - 1].first)
            throw std::invalid_argument("titration threshold: magnitudes must be ascending");
    if (curve.front().second < 0.75)
        throw std::runtime_error("titration threshold: accuracy below 0.75 at zero perturbation");
    for (size_t i = 0; i + 1 < curve.size(); ++i) {
        const auto [s0, a0] = curve[i];
        const auto [s1, a1] = curve[i + 1];
        if (a0 >= 0.75 && a1 < 0.75) return s0 + (a0 - 0.75) / (a0 - a1) * (s1 - s0);
    }
    return kAboveRange;
}

double effective_dim(const std::vector<std::vector<double>>& samples, int min_samples) {
    if (static_cast<int>(samples.size()) < min_samples)
        throw std::invalid_argument("effective dimension: too few samples");
    const size_t n = samples.size();
    const size_t d = samples[0].size();
    for (const auto& row : samples)
        if (row.size() != d) throw std::invalid_argument("effective dimension: ragged samples");
    std::vector<double> mean(d, 0.0);
    for (const auto& row : samples)
        for (size_t i = 0; i < d; ++i) mean[i] += row[i];
    for (auto& m : mean) m /= static_cast<double>(n);
    // participation ratio needs only trace(C) and ||C||_F
    std::vector<double> cov(d * d, 0.0);
    std::vector<double> cen(d);
    for (const auto& row : samples) {
        for (size_t i = 0; i < d; ++i) cen[i] = row[i] - mean[i];
        for (size_t i = 0; i < d; ++i)
            for (size_t j = i; j < d; ++j) cov[i * d + j] += cen[i] * cen[j];
    }
    double tr = 0.0, fr2 = 0.0;
    for (size_t i = 0; i < d; ++i) {
        for (size_t j = i; j < d; ++j) {
            const double c = cov[i * d + j] / static_cast<double>(n - 1);
            fr2 += (i == j) ? c * c : 2.0 * c * c;
        }
        tr += cov[i * d + i] / static_cast<double>(n - 1);
    }
    if (fr2 <= 0.0 || tr <= 0.0)
        throw std::runtime_error("effective dimension: degenerate covariance");
    return tr * tr / fr2;
}

EigenSym eigen_sym(std::vector<double> matrix, int d) {
    if (d < 1 || matrix.size() != static_cast<size_t>(d) * d)
        throw std::invalid_argument("eigen: bad dimensions");
    std::vector<double> v(static_cast<size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) v[i * d + i] = 1.0;
    double scale = 0.0;
    for (int i = 0; i < d; ++i) scale += std::abs(matrix[i * d + i]);
    scale = std::max(scale, 1e-300);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) off += matrix[p * d + q] * matrix[p * d + q];
        if (off < 1e-26 * scale * scale) break;
        for (int p = 0; p < d - 1; ++p) {
            for (int q = p + 1; q < d; ++q) {
                const double apq = matrix[p * d + q];
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (matrix[q * d + q] - matrix[p * d + p]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < d; ++k) {
                    const double akp = matrix[k * d + p], akq = matrix[k * d + q];
                    matrix[k * d + p] = c * akp - s * akq;
                    matrix[k * d + q] = s * akp + c * akq;
                }
                for (int k = 0; k < d; ++k) {
                    const double apk = matrix[p * d + k], aqk = matrix[q * d + k];
                    matrix[p * d + k] = c * apk - s * aqk;
                    matrix[q * d + k] = s * apk + c * aqk;
                }
                for (int k = 0; k < d; ++k) {
                    const double vkp = v[k * d + p], vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return matrix[a * d + a] > matrix[b * d + b]; });
    EigenSym out;
    out.values.resize(d);
    out.vectors.assign(static_cast<size_t>(d) * d, 0.0);
    for (int c = 0; c < d; ++c) {
        out.values[c] = matrix[order[c] * d + order[c]];
        for (int r = 0; r < d; ++r) out.vectors[r * d + c] = v[r * d + order[c]];
    }
    return out;
}

double pca_probe_baseline(const std::vector<std::vector<double>>& features,
                          const std::vector<int>& correct, int target_dim, int k_folds,
                          uint64_t seed) {
    check_probe_input(features, correct, k_folds);
    const int n = static_cast<int>(features.size());
    const int d = static_cast<int>(features[0].size());
    const int k = std::clamp(target_dim, 1, d);
    std::vector<double> mean(d, 0.0);
    for (const auto& row : features)
        for (int i = 0; i < d; ++i) mean[i] += row[i];
    for (auto& m : mean) m /= n;
    std::vector<double> cov(static_cast<size_t>(d) * d, 0.0);
    std::vector<double> cen(d);
    for (const auto& row : features) {
        for (int i = 0; i < d; ++i) cen[i] = row[i] - mean[i];
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) cov[i * d + j] += cen[i] * cen[j];
    }
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            cov[i * d + j] /= std::max(n - 1, 1);
            cov[j * d + i] = cov[i * d + j];
        }
    EigenSym eig = eigen_sym(cov, d);
    std::vector<std::vector<double>> proj(n, std::vector<double>(k, 0.0));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < k; ++c) {
            double s = 0.0;
            for (int i = 0; i < d; ++i)
                s += (features[r][i] - mean[i]) * eig.vectors[static_cast<size_t>(i) * d + c];
            proj[r][c] = s;
        }
    return probe_auc(proj, correct, k_folds, seed);
}

}  // namespace agentlab
