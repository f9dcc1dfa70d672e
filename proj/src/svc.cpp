#include "hhri/svc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>

#include "hhri/parallel.hpp"
#include "hhri/rng.hpp"

namespace hhri {

double rbf_kernel(const RbfKernelParams& kp, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("rbf_kernel: feature dimensions differ");
    }
    return std::exp(-kp.gamma * (a - b).squaredNorm());
}

Eigen::MatrixXd FeatureScaler::apply(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd z = x;
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        z.col(c) = (z.col(c).array() - shift[c]) / scale[c];
    }
    return z;
}

Eigen::VectorXd FeatureScaler::apply_row(const Eigen::VectorXd& x) const {
    if (x.size() != shift.size()) throw DimensionMismatch("scaler: feature dimensions differ");
    return (x.array() - shift.array()) / scale.array();
}

Eigen::VectorXd FeatureScaler::invert_row(const Eigen::VectorXd& z) const {
    if (z.size() != shift.size()) throw DimensionMismatch("scaler: feature dimensions differ");
    return z.array() * scale.array() + shift.array();
}

FeatureScaler FeatureScaler::fit(const Eigen::MatrixXd& x) {
    FeatureScaler s;
    s.shift.resize(x.cols());
    s.scale.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double mean = x.col(c).mean();
        const double var = (x.col(c).array() - mean).square().sum() /
                           std::max<double>(1.0, static_cast<double>(x.rows()));
        const double sd = std::sqrt(var);
        s.shift[c] = mean;
        s.scale[c] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
}

// ---------------------------------------------------------------------------
// kernel matrix sources
// ---------------------------------------------------------------------------

namespace {

class GramSource {
public:
    virtual ~GramSource() = default;
    virtual double entry(int i, int j) const = 0;
    /// u[t] += ci * K(i, act[t]) + cj * K(j, act[t])
    virtual void axpy2(int i, double ci, int j, double cj, const std::vector<int>& act,
                       std::vector<double>& u) const = 0;
    /// u[t] += c * K(i, act[t])
    virtual void axpy(int i, double c, const std::vector<int>& act,
                      std::vector<double>& u) const = 0;
};

inline double sq_dist(const Eigen::MatrixXd& x, int i, int j) {
    double d = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double diff = x(i, c) - x(j, c);
        d += diff * diff;
    }
    return d;
}

/// Full matrix in float; the default for section-sized datasets.
class DenseFloatGram final : public GramSource {
public:
    DenseFloatGram(const Eigen::MatrixXd& x, double gamma)
        : n_(static_cast<std::size_t>(x.rows())), mat_(n_ * n_) {
        parallel_for(n_, [&](std::size_t i) {
            const int ii = static_cast<int>(i);
            for (std::size_t j = i; j < n_; ++j) {
                const float v = std::exp(
                    static_cast<float>(-gamma * sq_dist(x, ii, static_cast<int>(j))));
                mat_[i * n_ + j] = v;
                mat_[j * n_ + i] = v;
            }
        }, 8);
    }

    double entry(int i, int j) const override {
        return mat_[static_cast<std::size_t>(i) * n_ + static_cast<std::size_t>(j)];
    }
    void axpy(int i, double c, const std::vector<int>& act,
              std::vector<double>& u) const override {
        const float* row = &mat_[static_cast<std::size_t>(i) * n_];
        for (std::size_t t = 0; t < act.size(); ++t) {
            u[t] += c * row[act[t]];
        }
    }
    void axpy2(int i, double ci, int j, double cj, const std::vector<int>& act,
               std::vector<double>& u) const override {
        const float* ri = &mat_[static_cast<std::size_t>(i) * n_];
        const float* rj = &mat_[static_cast<std::size_t>(j) * n_];
        for (std::size_t t = 0; t < act.size(); ++t) {
            u[t] += ci * ri[act[t]] + cj * rj[act[t]];
        }
    }

private:
    std::size_t n_;
    std::vector<float> mat_;
};

/// Full matrix in double for small problems (tests, tight KKT checks).
class DenseDoubleGram final : public GramSource {
public:
    DenseDoubleGram(const Eigen::MatrixXd& x, double gamma)
        : n_(static_cast<std::size_t>(x.rows())), mat_(n_ * n_) {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i; j < n_; ++j) {
                const double v =
                    std::exp(-gamma * sq_dist(x, static_cast<int>(i), static_cast<int>(j)));
                mat_[i * n_ + j] = v;
                mat_[j * n_ + i] = v;
            }
        }
    }

    double entry(int i, int j) const override {
        return mat_[static_cast<std::size_t>(i) * n_ + static_cast<std::size_t>(j)];
    }
    void axpy(int i, double c, const std::vector<int>& act,
              std::vector<double>& u) const override {
        const double* row = &mat_[static_cast<std::size_t>(i) * n_];
        for (std::size_t t = 0; t < act.size(); ++t) {
            u[t] += c * row[act[t]];
        }
    }
    void axpy2(int i, double ci, int j, double cj, const std::vector<int>& act,
               std::vector<double>& u) const override {
        const double* ri = &mat_[static_cast<std::size_t>(i) * n_];
        const double* rj = &mat_[static_cast<std::size_t>(j) * n_];
        for (std::size_t t = 0; t < act.size(); ++t) {
            u[t] += ci * ri[act[t]] + cj * rj[act[t]];
        }
    }

private:
    std::size_t n_;
    std::vector<double> mat_;
};

/// Row cache for datasets too large for a full matrix; rows are computed on
/// demand and evicted FIFO under a fixed byte budget.
class RowCacheGram final : public GramSource {
public:
    RowCacheGram(const Eigen::MatrixXd& x, double gamma, std::size_t budget_bytes = 1u << 30)
        : x_(x), gamma_(gamma), n_(static_cast<std::size_t>(x.rows())) {
        capacity_ = std::max<std::size_t>(2, budget_bytes / (n_ * sizeof(float)));
        rows_.resize(n_);
    }

    double entry(int i, int j) const override {
        return std::exp(-gamma_ * sq_dist(x_, i, j));
    }
    void axpy(int i, double c, const std::vector<int>& act,
              std::vector<double>& u) const override {
        const float* row = fetch(i);
        for (std::size_t t = 0; t < act.size(); ++t) u[t] += c * row[act[t]];
    }
    void axpy2(int i, double ci, int j, double cj, const std::vector<int>& act,
               std::vector<double>& u) const override {
        axpy(i, ci, act, u);
        axpy(j, cj, act, u);
    }

private:
    const float* fetch(int i) const {
        std::lock_guard<std::mutex> lock(mutex_);
        auto& slot = rows_[static_cast<std::size_t>(i)];
        if (slot.empty()) {
            if (fifo_.size() >= capacity_) {
                rows_[fifo_.front()].clear();
                rows_[fifo_.front()].shrink_to_fit();
                fifo_.erase(fifo_.begin());
            }
            slot.resize(n_);
            for (std::size_t j = 0; j < n_; ++j) {
                slot[j] = static_cast<float>(
                    std::exp(-gamma_ * sq_dist(x_, i, static_cast<int>(j))));
            }
            fifo_.push_back(static_cast<std::size_t>(i));
        }
        return slot.data();
    }

    const Eigen::MatrixXd& x_;
    double gamma_;
    std::size_t n_;
    std::size_t capacity_;
    mutable std::mutex mutex_;
    mutable std::vector<std::vector<float>> rows_;
    mutable std::vector<std::size_t> fifo_;
};

constexpr std::size_t kDoubleGramMax = 2500;
constexpr std::size_t kFloatGramMax = 20000;

std::unique_ptr<GramSource> make_gram(const Eigen::MatrixXd& x, double gamma) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (n <= kDoubleGramMax) return std::make_unique<DenseDoubleGram>(x, gamma);
    if (n <= kFloatGramMax) return std::make_unique<DenseFloatGram>(x, gamma);
    return std::make_unique<RowCacheGram>(x, gamma);
}

// ---------------------------------------------------------------------------
// SMO core (maximal violating pair working-set selection)
// ---------------------------------------------------------------------------

struct SmoResult {
    std::vector<double> alpha;  ///< aligned with the active index list
    double bias = 0.0;
    bool converged = false;
    double dual_objective = 0.0;
};

/// Solves max sum(a) - 1/2 sum a_s a_t y_s y_t K(s,t), 0 <= a <= C,
/// sum a_t y_t = 0 over the rows `act`; y holds +-1 per active entry.
SmoResult smo_solve(const GramSource& gram, const std::vector<int>& act,
                    const std::vector<signed char>& y, double C, const SolveOptions& opts) {
    constexpr double kTau = 1e-12;
    const std::size_t m = act.size();
    std::vector<double> alpha(m, 0.0);
    std::vector<double> u(m, 0.0);  // u_t = sum_s alpha_s y_s K(s, t)
    std::vector<double> diag(m);
    for (std::size_t t = 0; t < m; ++t) diag[t] = gram.entry(act[t], act[t]);

    SmoResult res;
    double gmax = 0.0, gmin = 0.0;
    for (long iter = 0; iter < opts.max_iter; ++iter) {
        // working set: i maximizes y - u over I_up, j minimizes over I_low
        gmax = -std::numeric_limits<double>::infinity();
        gmin = std::numeric_limits<double>::infinity();
        int i = -1, j = -1;
        for (std::size_t t = 0; t < m; ++t) {
            const double g = y[t] - u[t];
            if (y[t] > 0 ? alpha[t] < C : alpha[t] > 0.0) {
                if (g > gmax) {
                    gmax = g;
                    i = static_cast<int>(t);
                }
            }
            if (y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < C) {
                if (g < gmin) {
                    gmin = g;
                    j = static_cast<int>(t);
                }
            }
        }
        if (i < 0 || j < 0 || gmax - gmin <= opts.tol) {
            res.converged = true;
            break;
        }

        const std::size_t si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
        const double kij = gram.entry(act[si], act[sj]);
        const double old_i = alpha[si], old_j = alpha[sj];
        const double gi = y[si] * u[si] - 1.0;  // gradient of the primal-form dual
        const double gj = y[sj] * u[sj] - 1.0;

        if (y[si] != y[sj]) {
            double quad = diag[si] + diag[sj] + 2.0 * kij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-gi - gj) / quad;
            const double diff = alpha[si] - alpha[sj];
            alpha[si] += delta;
            alpha[sj] += delta;
            if (diff > 0.0) {
                if (alpha[sj] < 0.0) {
                    alpha[sj] = 0.0;
                    alpha[si] = diff;
                }
            } else {
                if (alpha[si] < 0.0) {
                    alpha[si] = 0.0;
                    alpha[sj] = -diff;
                }
            }
            if (diff > 0.0) {
                if (alpha[si] > C) {
                    alpha[si] = C;
                    alpha[sj] = C - diff;
                }
            } else {
                if (alpha[sj] > C) {
                    alpha[sj] = C;
                    alpha[si] = C + diff;
                }
            }
        } else {
            double quad = diag[si] + diag[sj] - 2.0 * kij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (gi - gj) / quad;
            const double sum = alpha[si] + alpha[sj];
            alpha[si] -= delta;
            alpha[sj] += delta;
            if (sum > C) {
                if (alpha[si] > C) {
                    alpha[si] = C;
                    alpha[sj] = sum - C;
                }
            } else {
                if (alpha[sj] < 0.0) {
                    alpha[sj] = 0.0;
                    alpha[si] = sum;
                }
            }
            if (sum > C) {
                if (alpha[sj] > C) {
                    alpha[sj] = C;
                    alpha[si] = sum - C;
                }
            } else {
                if (alpha[si] < 0.0) {
                    alpha[si] = 0.0;
                    alpha[sj] = sum;
                }
            }
        }

        const double ci = (alpha[si] - old_i) * y[si];
        const double cj = (alpha[sj] - old_j) * y[sj];
        if (ci != 0.0 || cj != 0.0) {
            gram.axpy2(act[si], ci, act[sj], cj, act, u);
        }
    }

    // bias from free support vectors, else from the final violation bounds
    double sum_free = 0.0;
    int n_free = 0;
    for (std::size_t t = 0; t < m; ++t) {
        if (alpha[t] > 0.0 && alpha[t] < C) {
            sum_free += y[t] - u[t];
            ++n_free;
        }
    }
    res.bias = n_free > 0 ? sum_free / n_free : 0.5 * (gmax + gmin);
    if (!std::isfinite(res.bias)) res.bias = 0.0;

    double obj = 0.0;
    for (std::size_t t = 0; t < m; ++t) obj += alpha[t] - 0.5 * alpha[t] * y[t] * u[t];
    res.dual_objective = obj;
    res.alpha = std::move(alpha);
    return res;
}

constexpr double kAlphaPrune = 1e-8;

BinarySvm assemble_binary(const RbfKernelParams& kp, const Eigen::MatrixXd& x,
                          const std::vector<int>& act, const std::vector<signed char>& y,
                          const SmoResult& res, int class_pos, int class_neg) {
    BinarySvm svm;
    svm.kernel = kp;
    svm.bias = res.bias;
    svm.converged = res.converged;
    svm.class_pos = class_pos;
    svm.class_neg = class_neg;
    std::vector<int> keep;
    for (std::size_t t = 0; t < act.size(); ++t) {
        if (res.alpha[t] >= kAlphaPrune) keep.push_back(static_cast<int>(t));
    }
    svm.support_points.resize(static_cast<Eigen::Index>(keep.size()), x.cols());
    svm.dual_coefs.resize(keep.size());
    svm.support_rows.resize(keep.size());
    for (std::size_t s = 0; s < keep.size(); ++s) {
        const std::size_t t = static_cast<std::size_t>(keep[s]);
        svm.support_points.row(static_cast<Eigen::Index>(s)) = x.row(act[t]);
        svm.dual_coefs[s] = res.alpha[t] * y[t];
        svm.support_rows[s] = act[t];
    }
    return svm;
}

} // namespace

double decision_function(const BinarySvm& m, const Eigen::VectorXd& p) {
    if (p.size() != m.support_points.cols()) {
        throw DimensionMismatch("decision_function: feature dimensions differ");
    }
    double d = m.bias;
    for (Eigen::Index s = 0; s < m.support_points.rows(); ++s) {
        double dist = 0.0;
        for (Eigen::Index c = 0; c < p.size(); ++c) {
            const double diff = m.support_points(s, c) - p[c];
            dist += diff * diff;
        }
        d += m.dual_coefs[static_cast<std::size_t>(s)] * std::exp(-m.kernel.gamma * dist);
    }
    return d;
}

BinarySvm solve_binary(const RbfKernelParams& kp, const Eigen::MatrixXd& points,
                       const std::vector<int>& labels, const SolveOptions& opts) {
    if (points.rows() != static_cast<Eigen::Index>(labels.size())) {
        throw DimensionMismatch("solve_binary: points/labels size mismatch");
    }
    bool has_pos = false, has_neg = false;
    std::vector<signed char> y(labels.size());
    for (std::size_t t = 0; t < labels.size(); ++t) {
        if (labels[t] == 1) {
            y[t] = 1;
            has_pos = true;
        } else if (labels[t] == -1) {
            y[t] = -1;
            has_neg = true;
        } else {
            throw std::invalid_argument("solve_binary: labels must be +-1");
        }
    }
    if (!has_pos || !has_neg) throw SingleClass("solve_binary: both classes required");

    const auto gram = make_gram(points, kp.gamma);
    std::vector<int> act(labels.size());
    std::iota(act.begin(), act.end(), 0);
    const SmoResult res = smo_solve(*gram, act, y, kp.C, opts);
    return assemble_binary(kp, points, act, y, res, +1, -1);
}

int SvcModel::predict(const Eigen::VectorXd& raw_features) const {
    const Eigen::VectorXd f = scaler ? scaler->apply_row(raw_features) : raw_features;
    std::map<int, int> votes;
    std::map<int, double> score;
    for (int c : classes) {
        votes[c] = 0;
        score[c] = 0.0;
    }
    for (const BinarySvm& m : pairwise) {
        const double d = decision_function(m, f);
        votes[d > 0.0 ? m.class_pos : m.class_neg] += 1;
        score[m.class_pos] += d;
        score[m.class_neg] -= d;
    }
    int best = classes.front();
    for (int c : classes) {
        if (votes[c] > votes[best] ||
            (votes[c] == votes[best] && score[c] > score[best])) {
            best = c;
        }
    }
    return best;
}

std::vector<int> SvcModel::support_union() const {
    std::vector<int> rows;
    for (const BinarySvm& m : pairwise) {
        rows.insert(rows.end(), m.support_rows.begin(), m.support_rows.end());
    }
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    return rows;
}

SvcModel train_multiclass(const RbfKernelParams& kp, const LabeledDataset& ds, bool scale,
                          const SolveOptions& opts) {
    const std::vector<int> classes = ds.class_list();
    if (classes.size() < 2) throw SingleClass("train_multiclass: need at least two classes");

    SvcModel model;
    model.classes = classes;
    model.feature_names = ds.feature_names;
    Eigen::MatrixXd x = ds.features;
    if (scale) {
        model.scaler = FeatureScaler::fit(x);
        x = model.scaler->apply(x);
    }

    const auto gram = make_gram(x, kp.gamma);
    for (std::size_t a = 0; a < classes.size(); ++a) {
        for (std::size_t b = a + 1; b < classes.size(); ++b) {
            std::vector<int> act;
            std::vector<signed char> y;
            for (Eigen::Index r = 0; r < ds.size(); ++r) {
                const int lbl = ds.labels[static_cast<std::size_t>(r)].value;
                if (lbl == classes[a]) {
                    act.push_back(static_cast<int>(r));
                    y.push_back(+1);
                } else if (lbl == classes[b]) {
                    act.push_back(static_cast<int>(r));
                    y.push_back(-1);
                }
            }
            const SmoResult res = smo_solve(*gram, act, y, kp.C, opts);
            model.pairwise.push_back(
                assemble_binary(kp, x, act, y, res, classes[a], classes[b]));
        }
    }
    return model;
}

std::vector<std::vector<int>> stratified_folds(const LabeledDataset& ds, int n_folds,
                                               std::uint64_t seed) {
    if (n_folds < 2) throw std::invalid_argument("stratified_folds: need n_folds >= 2");
    std::map<int, std::vector<int>> by_class;
    for (Eigen::Index r = 0; r < ds.size(); ++r) {
        by_class[ds.labels[static_cast<std::size_t>(r)].value].push_back(static_cast<int>(r));
    }
    Rng rng(seed);
    std::vector<std::vector<int>> folds(static_cast<std::size_t>(n_folds));
    for (auto& [cls, rows] : by_class) {
        rng.shuffle(rows);
        for (std::size_t k = 0; k < rows.size(); ++k) {
            folds[k % static_cast<std::size_t>(n_folds)].push_back(rows[k]);
        }
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

namespace {

/// Accuracy of one-vs-one voting over held-out rows, with all pairwise
/// machines trained on `train_rows` through the shared kernel matrix.
double fit_predict_fold(const GramSource& gram, const LabeledDataset& ds,
                        const std::vector<int>& classes, const std::vector<int>& train_rows,
                        const std::vector<int>& test_rows, const RbfKernelParams& kp,
                        const SolveOptions& opts) {
    const std::size_t n_test = test_rows.size();
    std::vector<int> votes(n_test * classes.size(), 0);
    std::vector<double> score(n_test * classes.size(), 0.0);
    auto class_index = [&](int lbl) {
        return static_cast<std::size_t>(
            std::find(classes.begin(), classes.end(), lbl) - classes.begin());
    };

    for (std::size_t a = 0; a < classes.size(); ++a) {
        for (std::size_t b = a + 1; b < classes.size(); ++b) {
            std::vector<int> act;
            std::vector<signed char> y;
            for (int r : train_rows) {
                const int lbl = ds.labels[static_cast<std::size_t>(r)].value;
                if (lbl == classes[a]) {
                    act.push_back(r);
                    y.push_back(+1);
                } else if (lbl == classes[b]) {
                    act.push_back(r);
                    y.push_back(-1);
                }
            }
            if (act.empty()) continue;
            const SmoResult res = smo_solve(gram, act, y, kp.C, opts);

            std::vector<double> u(n_test, 0.0);
            for (std::size_t t = 0; t < act.size(); ++t) {
                const double coef = res.alpha[t] * y[t];
                if (std::abs(coef) >= kAlphaPrune) {
                    gram.axpy(act[t], coef, test_rows, u);
                }
            }
            for (std::size_t t = 0; t < n_test; ++t) {
                const double d = u[t] + res.bias;
                const std::size_t winner = d > 0.0 ? a : b;
                votes[t * classes.size() + winner] += 1;
                score[t * classes.size() + a] += d;
                score[t * classes.size() + b] -= d;
            }
        }
    }

    std::size_t correct = 0;
    for (std::size_t t = 0; t < n_test; ++t) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < classes.size(); ++c) {
            if (votes[t * classes.size() + c] > votes[t * classes.size() + best] ||
                (votes[t * classes.size() + c] == votes[t * classes.size() + best] &&
                 score[t * classes.size() + c] > score[t * classes.size() + best])) {
                best = c;
            }
        }
        if (classes[best] == ds.labels[static_cast<std::size_t>(test_rows[t])].value) {
            ++correct;
        }
    }
    return n_test == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(n_test);
}

} // namespace

std::vector<double> cross_validate(const RbfKernelParams& kp, const LabeledDataset& ds,
                                   int n_folds, std::uint64_t seed, bool scale,
                                   const SolveOptions& opts) {
    const auto folds = stratified_folds(ds, n_folds, seed);
    const std::vector<int> classes = ds.class_list();
    std::vector<double> acc(folds.size(), 0.0);
    for (std::size_t k = 0; k < folds.size(); ++k) {
        std::vector<int> train_rows;
        for (std::size_t f = 0; f < folds.size(); ++f) {
            if (f == k) continue;
            train_rows.insert(train_rows.end(), folds[f].begin(), folds[f].end());
        }
        std::sort(train_rows.begin(), train_rows.end());

        Eigen::MatrixXd x = ds.features;
        if (scale) {
            Eigen::MatrixXd xt(static_cast<Eigen::Index>(train_rows.size()), x.cols());
            for (std::size_t r = 0; r < train_rows.size(); ++r) {
                xt.row(static_cast<Eigen::Index>(r)) = x.row(train_rows[r]);
            }
            x = FeatureScaler::fit(xt).apply(x);
        }
        const auto gram = make_gram(x, kp.gamma);
        acc[k] = fit_predict_fold(*gram, ds, classes, train_rows, folds[k], kp, opts);
    }
    return acc;
}

CvReport grid_search(const LabeledDataset& ds, const std::vector<double>& C_grid,
                     const std::vector<double>& gamma_grid, int n_folds, std::uint64_t seed,
                     bool scale, const SolveOptions& opts) {
    if (C_grid.empty() || gamma_grid.empty()) {
        throw std::invalid_argument("grid_search: empty parameter grid");
    }
    const auto folds = stratified_folds(ds, n_folds, seed);
    const std::vector<int> classes = ds.class_list();

    CvReport report;
    report.n_folds = n_folds;
    for (double C : C_grid) {
        for (double gamma : gamma_grid) {
            CvReport::Cell cell;
            cell.C = C;
            cell.gamma = gamma;
            cell.fold_accuracies.assign(static_cast<std::size_t>(n_folds), 0.0);
            report.grid.push_back(std::move(cell));
        }
    }
    auto cell_at = [&](std::size_t ci, std::size_t gi) -> CvReport::Cell& {
        return report.grid[ci * gamma_grid.size() + gi];
    };

    std::vector<std::vector<int>> train_rows(folds.size());
    for (std::size_t k = 0; k < folds.size(); ++k) {
        for (std::size_t f = 0; f < folds.size(); ++f) {
            if (f == k) continue;
            train_rows[k].insert(train_rows[k].end(), folds[f].begin(), folds[f].end());
        }
        std::sort(train_rows[k].begin(), train_rows[k].end());
    }

    if (!scale) {
        // one kernel matrix per gamma, shared by every fold and C
        for (std::size_t gi = 0; gi < gamma_grid.size(); ++gi) {
            const auto gram = make_gram(ds.features, gamma_grid[gi]);
            const std::size_t units = folds.size() * C_grid.size();
            parallel_for(units, [&](std::size_t unit) {
                const std::size_t k = unit / C_grid.size();
                const std::size_t ci = unit % C_grid.size();
                const RbfKernelParams kp{gamma_grid[gi], C_grid[ci]};
                cell_at(ci, gi).fold_accuracies[k] =
                    fit_predict_fold(*gram, ds, classes, train_rows[k], folds[k], kp, opts);
            }, 1);
        }
    } else {
        // the scaler is fit per fold, so the kernel matrix depends on the fold
        for (std::size_t k = 0; k < folds.size(); ++k) {
            Eigen::MatrixXd xt(static_cast<Eigen::Index>(train_rows[k].size()),
                               ds.features.cols());
            for (std::size_t r = 0; r < train_rows[k].size(); ++r) {
                xt.row(static_cast<Eigen::Index>(r)) = ds.features.row(train_rows[k][r]);
            }
            const Eigen::MatrixXd x = FeatureScaler::fit(xt).apply(ds.features);
            for (std::size_t gi = 0; gi < gamma_grid.size(); ++gi) {
                const auto gram = make_gram(x, gamma_grid[gi]);
                parallel_for(C_grid.size(), [&](std::size_t ci) {
                    const RbfKernelParams kp{gamma_grid[gi], C_grid[ci]};
                    cell_at(ci, gi).fold_accuracies[k] =
                        fit_predict_fold(*gram, ds, classes, train_rows[k], folds[k], kp, opts);
                }, 1);
            }
        }
    }

    double best = -1.0;
    for (auto& cell : report.grid) {
        cell.mean_accuracy =
            std::accumulate(cell.fold_accuracies.begin(), cell.fold_accuracies.end(), 0.0) /
            static_cast<double>(cell.fold_accuracies.size());
    }
    for (const auto& cell : report.grid) {
        const bool better =
            cell.mean_accuracy > best + 1e-15 ||
            (std::abs(cell.mean_accuracy - best) <= 1e-15 &&
             (cell.C < report.best_C ||
              (cell.C == report.best_C && cell.gamma < report.best_gamma)));
        if (best < 0.0 || better) {
            best = cell.mean_accuracy;
            report.best_C = cell.C;
            report.best_gamma = cell.gamma;
        }
    }
    return report;
}

} // namespace hhri
