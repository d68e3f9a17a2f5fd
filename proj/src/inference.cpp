#include "condense/inference.hpp"

#include "condense/distributions.hpp"
#include "condense/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace condense {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kAdaptBatch = 50;
// Non-final sticks stay strictly inside (0, 1) so their logits are finite.
constexpr double kStickMin = 1e-300;
constexpr double kStickMax = 1.0 - 0x1.0p-53;
constexpr double kLogitMin = -690.0;
constexpr double kLogitMax = 36.0;

enum Block : std::size_t { kSigma = 0, kMuX = 1, kSticks = 2, kBlocks = 3 };

struct BlockTally {
    std::size_t accepted[kBlocks] = {0, 0, 0};
    std::size_t proposed[kBlocks] = {0, 0, 0};
};

double reflect_unit(double v) {
    // fold onto [0, 1]; proposals larger than the cube fold repeatedly
    v = std::fmod(std::abs(v), 2.0);
    return v > 1.0 ? 2.0 - v : v;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

double log_prior(const MixtureState& state, const PriorConfig& prior) {
    double lp = 0.0;
    for (std::size_t j = 0; j + 1 < state.size(); ++j) {
        lp += std::log(prior.c0) + (prior.c0 - 1.0) * std::log1p(-state.sticks[j]);
    }
    const double tau = std::sqrt(prior.gamma.tau2);
    for (std::size_t j = 0; j < state.size(); ++j) {
        for (std::size_t k = 0; k < state.d_y; ++k) {
            lp += log_normal_pdf_1d(state.mu_y[j * state.d_y + k], prior.gamma.lambda[k], tau);
        }
    }
    const double a = prior.alpha_shape, b = prior.gamma.beta_scale;
    lp += a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(state.sigma) - b / state.sigma;
    return lp;
}

} // namespace

std::string to_string(LikelihoodMode mode) {
    return mode == LikelihoodMode::joint_fit ? "joint_fit" : "conditional_likelihood";
}

LikelihoodMode likelihood_mode_from_string(const std::string& name) {
    if (name == "conditional_likelihood" || name == "conditional") return LikelihoodMode::conditional_likelihood;
    if (name == "joint_fit" || name == "joint") return LikelihoodMode::joint_fit;
    throw ConfigError("unknown likelihood mode '" + name + "'");
}

std::size_t ChainConfig::retained() const {
    if (iterations <= burn_in || thin == 0) return 0;
    return (iterations - burn_in - 1) / thin + 1;
}

void ChainConfig::validate() const {
    if (iterations == 0) throw ConfigError("iterations must be positive");
    if (burn_in >= iterations) throw ConfigError("burn_in must be smaller than iterations");
    if (thin == 0) throw ConfigError("thin must be positive");
    if (!(proposal_scales.log_sigma_step > 0.0 && proposal_scales.mu_x_step > 0.0 &&
          proposal_scales.stick_logit_step > 0.0)) {
        throw ConfigError("proposal scales must be positive");
    }
    if (retained() < min_retained) {
        throw ConfigError("chain retains " + std::to_string(retained()) + " draws, need at least " +
                          std::to_string(min_retained));
    }
}

std::vector<std::size_t> allocation_counts(std::span<const std::size_t> allocations,
                                           std::size_t components) {
    std::vector<std::size_t> counts(components, 0);
    for (std::size_t s : allocations) ++counts.at(s);
    return counts;
}

// ---------------------------------------------------------------------------
// Sampler: state plus the caches that make one sweep O(n N).
//
// d2x_[i * N + j] = |x_i - mu_j^x|^2.
// In conditional mode the normaliser g(x_i), up to the factor
// (2 pi sigma^2)^{-d_x/2}, is exp(c_[i]) * S_[i] with
// S_[i] = sum_j E_[i * N + j] and E_[i * N + j] = exp(logp_j - d2x_ij / 2 sigma^2 - c_[i]).

class Sampler {
public:
    Sampler(const Dataset& data, const PriorConfig& prior, LikelihoodMode mode, MixtureState init)
        : data_(data), prior_(prior), mode_(mode), state_(std::move(init)) {
        if (!data_.empty() && (data_.d_x != state_.d_x || data_.d_y != state_.d_y)) {
            throw DomainError("data and state dimensions differ");
        }
        n_ = data_.size();
        m_ = state_.size();
        alloc_.assign(n_, 0);
        d2x_.assign(n_ * m_, 0.0);
        E_.assign(n_ * m_, 0.0);
        c_.assign(n_, 0.0);
        S_.assign(n_, 0.0);
        for (std::size_t j = 0; j < m_; ++j) refresh_d2x_column(j);
    }

    const MixtureState& state() const { return state_; }
    void sweep(RngStream& rng, const ProposalScales& scales, BlockTally& tally) {
        compute_logp();
        allocate(rng);
        state_.mu_y = update_mu_y(state_, alloc_, data_, prior_.gamma, rng);
        if (mode_ == LikelihoodMode::conditional_likelihood) {
            rebuild_normalizers();
            for (std::size_t j = 0; j < m_; ++j) {
                mh_mu_x(j, scales.mu_x_step, rng, tally);
                // independence move from the complete-data conditional
                mh_mu_x(j, scales.mu_x_step, rng, refresh_tally_, true);
            }
            for (std::size_t j = 0; j + 1 < m_; ++j) {
                mh_stick(j, scales.stick_logit_step, rng, tally);
                mh_stick(j, scales.stick_logit_step, rng, refresh_tally_, true);
            }
        } else {
            for (std::size_t j = 0; j < m_; ++j) gibbs_mu_x(j, rng);
            gibbs_sticks(rng);
        }
        state_.weights = stick_break(state_.sticks);
        compute_logp();
        mh_sigma(scales.log_sigma_step, rng, tally);
    }

private:
    void refresh_d2x_column(std::size_t j) {
        const auto mu = state_.atom_x(j);
        for (std::size_t i = 0; i < n_; ++i) d2x_[i * m_ + j] = squared_distance(data_.x_row(i), mu);
    }

    void compute_logp() {
        logp_.assign(m_, 0.0);
        double rest = 0.0;  // log prod_{h<j} (1 - V_h)
        for (std::size_t j = 0; j < m_; ++j) {
            const double v = state_.sticks[j];
            logp_[j] = (v > 0.0 ? std::log(v) : kNegInf) + rest;
            rest += (v < 1.0 ? std::log1p(-v) : kNegInf);
        }
    }

    void allocate(RngStream& rng) {
        const double inv2s2 = 1.0 / (2.0 * state_.sigma * state_.sigma);
        std::vector<double> a(m_);
        for (std::size_t i = 0; i < n_; ++i) {
            const auto yi = data_.y_row(i);
            double mx = kNegInf;
            for (std::size_t j = 0; j < m_; ++j) {
                const double d2y = squared_distance(yi, state_.atom_y(j));
                a[j] = logp_[j] - (d2x_[i * m_ + j] + d2y) * inv2s2;
                mx = std::max(mx, a[j]);
            }
            double total = 0.0;
            for (std::size_t j = 0; j < m_; ++j) {
                a[j] = std::exp(a[j] - mx);
                total += a[j];
            }
            const double u = rng.uniform() * total;
            double acc = 0.0;
            std::size_t pick = m_ - 1;
            for (std::size_t j = 0; j < m_; ++j) {
                acc += a[j];
                if (u < acc) {
                    pick = j;
                    break;
                }
            }
            // never land on a zero-probability tail component through round-off
            while (a[pick] == 0.0 && pick > 0) --pick;
            alloc_[i] = pick;
        }
        counts_ = allocation_counts(alloc_, m_);
    }

    void rebuild_normalizers() {
        const double inv2s2 = 1.0 / (2.0 * state_.sigma * state_.sigma);
        for (std::size_t i = 0; i < n_; ++i) {
            double* e = &E_[i * m_];
            double mx = kNegInf;
            for (std::size_t j = 0; j < m_; ++j) {
                e[j] = logp_[j] - d2x_[i * m_ + j] * inv2s2;
                mx = std::max(mx, e[j]);
            }
            double s = 0.0;
            for (std::size_t j = 0; j < m_; ++j) {
                e[j] = std::exp(e[j] - mx);
                s += e[j];
            }
            c_[i] = mx;
            S_[i] = s;
        }
    }

    // Row-wise replacement of one term of S; falls back to an exact rebuild
    // of the row when the cached reference c_[i] is no longer usable.
    double row_others(std::size_t i, std::size_t j) const {
        const double* e = &E_[i * m_];
        if (e[j] <= 0.5 * S_[i]) return S_[i] - e[j];
        double s = 0.0;
        for (std::size_t h = 0; h < m_; ++h) {
            if (h != j) s += e[h];
        }
        return s;
    }

    // Two proposals for mu_j^x: a reflected random walk, or an independent
    // draw from the complete-data conditional. With the latter every factor
    // but the normaliser cancels from the ratio.
    void mh_mu_x(std::size_t j, double step, RngStream& rng, BlockTally& tally, bool from_conditional = false) {
        const std::size_t dx = state_.d_x;
        std::vector<double> prop(dx);
        const auto cur = state_.atom_x(j);
        if (from_conditional) {
            draw_mu_x(j, rng, prop);
        } else {
            for (std::size_t k = 0; k < dx; ++k) prop[k] = reflect_unit(cur[k] + step * rng.normal());
        }

        const double inv2s2 = 1.0 / (2.0 * state_.sigma * state_.sigma);
        new_d2_.resize(n_);
        new_e_.resize(n_);
        new_s_.resize(n_);
        double log_ratio = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double d2 = squared_distance(data_.x_row(i), prop);
            new_d2_[i] = d2;
            if (!from_conditional && alloc_[i] == j) log_ratio -= (d2 - d2x_[i * m_ + j]) * inv2s2;
            const double e_new = std::exp(logp_[j] - d2 * inv2s2 - c_[i]);
            const double s_new = row_others(i, j) + e_new;
            new_e_[i] = e_new;
            new_s_[i] = s_new;
            if (!(s_new > 0.0) || !std::isfinite(s_new)) {
                // reference point unusable for this row: exact log-sum-exp
                log_ratio -= exact_row_lse(i, j, d2, inv2s2) - (c_[i] + std::log(S_[i]));
                new_s_[i] = -1.0;
                continue;
            }
            log_ratio -= std::log(s_new) - std::log(S_[i]);
        }
        ++tally.proposed[kMuX];
        if (std::log(rng.uniform()) < log_ratio) {
            ++tally.accepted[kMuX];
            std::copy(prop.begin(), prop.end(), state_.atom_x(j).begin());
            bool stale = false;
            for (std::size_t i = 0; i < n_; ++i) {
                d2x_[i * m_ + j] = new_d2_[i];
                if (new_s_[i] < 0.0) {
                    stale = true;
                    continue;
                }
                E_[i * m_ + j] = new_e_[i];
                S_[i] = new_s_[i];
            }
            if (stale) rebuild_normalizers();
        }
    }

    double exact_row_lse(std::size_t i, std::size_t j, double d2_new, double inv2s2) const {
        std::vector<double> t(m_);
        for (std::size_t h = 0; h < m_; ++h) {
            const double d2 = h == j ? d2_new : d2x_[i * m_ + h];
            t[h] = logp_[h] - d2 * inv2s2;
        }
        return log_sum_exp(t);
    }

    // Logit random walk, or an independent draw from the conjugate
    // Beta(1 + n_j, c0 + n_{>j}) that leaves only the normaliser in the ratio.
    void mh_stick(std::size_t j, double step, RngStream& rng, BlockTally& tally, bool from_conditional = false) {
        const double v = state_.sticks[j];
        const double log_v = std::log(v);
        const double log_1mv = std::log1p(-v);
        std::size_t later = 0;
        for (std::size_t h = j + 1; h < m_; ++h) later += counts_[h];
        const double nj = static_cast<double>(counts_[j]);
        const double nl = static_cast<double>(later);

        double log_v_new, log_1mv_new;
        ++tally.proposed[kSticks];
        if (from_conditional) {
            const double v_new = std::clamp(sample_beta(1.0 + nj, prior_.c0 + nl, rng), kStickMin, kStickMax);
            log_v_new = std::log(v_new);
            log_1mv_new = std::log1p(-v_new);
        } else {
            const double u_new = log_v - log_1mv + step * rng.normal();
            if (u_new < kLogitMin || u_new > kLogitMax) return;  // outside the represented support
            log_v_new = -std::log1p(std::exp(-u_new));
            log_1mv_new = -std::log1p(std::exp(u_new));
        }
        // Beta(1, c0) prior, complete-data numerator, logit Jacobian
        auto target = [&](double lv, double l1mv) {
            if (from_conditional) return 0.0;
            return (prior_.c0 - 1.0) * l1mv + nj * lv + nl * l1mv + lv + l1mv;
        };
        double log_ratio = target(log_v_new, log_1mv_new) - target(log_v, log_1mv);

        const double r1 = std::exp(log_v_new - log_v);
        const double r2 = std::exp(log_1mv_new - log_1mv);
        new_s_.resize(n_);
        bool exact_needed = false;
        for (std::size_t i = 0; i < n_; ++i) {
            const double* e = &E_[i * m_];
            double pre = 0.0, post = 0.0;
            for (std::size_t h = 0; h < j; ++h) pre += e[h];
            for (std::size_t h = j + 1; h < m_; ++h) post += e[h];
            const double s_new = pre + r1 * e[j] + r2 * post;
            new_s_[i] = s_new;
            if (!(s_new > 0.0) || !std::isfinite(s_new)) {
                exact_needed = true;
                break;
            }
            log_ratio -= std::log(s_new) - std::log(S_[i]);
        }
        if (exact_needed) log_ratio = exact_stick_ratio(j, log_v_new, log_1mv_new, target);

        if (std::log(rng.uniform()) < log_ratio) {
            ++tally.accepted[kSticks];
            state_.sticks[j] = std::clamp(std::exp(log_v_new), kStickMin, kStickMax);
            compute_logp();
            if (exact_needed) {
                rebuild_normalizers();
                return;
            }
            for (std::size_t i = 0; i < n_; ++i) {
                double* e = &E_[i * m_];
                e[j] *= r1;
                for (std::size_t h = j + 1; h < m_; ++h) e[h] *= r2;
                S_[i] = new_s_[i];
            }
        }
    }

    template <class Target>
    double exact_stick_ratio(std::size_t j, double log_v_new, double log_1mv_new,
                             const Target& target) {
        const double inv2s2 = 1.0 / (2.0 * state_.sigma * state_.sigma);
        const double v = state_.sticks[j];
        const double dv = log_v_new - std::log(v);
        const double d1 = log_1mv_new - std::log1p(-v);
        double ratio = target(log_v_new, log_1mv_new) - target(std::log(v), std::log1p(-v));
        std::vector<double> cur(m_), nxt(m_);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t h = 0; h < m_; ++h) {
                cur[h] = logp_[h] - d2x_[i * m_ + h] * inv2s2;
                nxt[h] = cur[h] + (h == j ? dv : (h > j ? d1 : 0.0));
            }
            ratio -= log_sum_exp(nxt) - log_sum_exp(cur);
        }
        return ratio;
    }

    // Complete-data full conditional of mu_j^x: uniform when the atom is
    // empty, else a Gaussian around the mean of its points truncated to [0,1].
    void draw_mu_x(std::size_t j, RngStream& rng, std::span<double> out) const {
        const std::size_t dx = state_.d_x;
        const std::size_t nj = counts_[j];
        if (nj == 0) {
            for (std::size_t k = 0; k < dx; ++k) out[k] = rng.uniform();
            return;
        }
        std::vector<double> mean(dx, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            if (alloc_[i] != j) continue;
            const auto xi = data_.x_row(i);
            for (std::size_t k = 0; k < dx; ++k) mean[k] += xi[k];
        }
        const double sd = state_.sigma / std::sqrt(static_cast<double>(nj));
        for (std::size_t k = 0; k < dx; ++k) {
            out[k] = sample_truncated_normal(mean[k] / static_cast<double>(nj), sd, 0.0, 1.0, rng);
        }
    }

    void gibbs_mu_x(std::size_t j, RngStream& rng) {
        draw_mu_x(j, rng, state_.atom_x(j));
        refresh_d2x_column(j);
    }

    void gibbs_sticks(RngStream& rng) {
        state_.sticks = sample_sticks_conjugate(counts_, prior_.c0, rng);
    }

    // Random walk on log sigma with the allocations summed out, so sigma is
    // not pinned by the current partition. The next sweep starts by redrawing
    // the allocations, which makes (sigma, allocations) one block. Per point
    // the target is LSE_j(logp_j - (d2x + d2y) / 2s^2) - d log s, minus the
    // normaliser LSE_j(logp_j - d2x / 2s^2) in conditional mode.
    void mh_sigma(double step, RngStream& rng, BlockTally& tally) {
        const bool conditional = mode_ == LikelihoodMode::conditional_likelihood;
        const double n = static_cast<double>(n_);
        const double dlik = static_cast<double>(conditional ? state_.d_y : state_.d_x + state_.d_y);
        const double a = prior_.alpha_shape, b = prior_.gamma.beta_scale;

        d2y_.resize(n_ * m_);
        for (std::size_t i = 0; i < n_; ++i) {
            const auto yi = data_.y_row(i);
            for (std::size_t j = 0; j < m_; ++j) d2y_[i * m_ + j] = squared_distance(yi, state_.atom_y(j));
        }

        const double sigma = state_.sigma;
        const double sigma_new = std::exp(std::log(sigma) + step * rng.normal());
        ++tally.proposed[kSigma];
        if (!(sigma_new > 0.0) || !std::isfinite(sigma_new)) return;

        // IG prior on sigma with log-scale Jacobian: -alpha log s - b / s
        auto base = [&](double s) { return -n * dlik * std::log(s) - a * std::log(s) - b / s; };
        double log_ratio = base(sigma_new) - base(sigma) + sum_joint_lse(sigma_new) - sum_joint_lse(sigma);
        if (conditional && n_ > 0) {
            double current = 0.0;
            for (std::size_t i = 0; i < n_; ++i) current += c_[i] + std::log(S_[i]);
            log_ratio -= sum_row_lse(sigma_new) - current;
        }
        if (std::log(rng.uniform()) < log_ratio) {
            ++tally.accepted[kSigma];
            state_.sigma = sigma_new;
        }
    }

    double sum_joint_lse(double sigma) {
        const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
        double total = 0.0;
        std::vector<double>& t = scratch_;
        t.resize(m_);
        for (std::size_t i = 0; i < n_; ++i) {
            double mx = kNegInf;
            for (std::size_t j = 0; j < m_; ++j) {
                t[j] = logp_[j] - (d2x_[i * m_ + j] + d2y_[i * m_ + j]) * inv2s2;
                mx = std::max(mx, t[j]);
            }
            double s = 0.0;
            for (std::size_t j = 0; j < m_; ++j) s += std::exp(t[j] - mx);
            total += mx + std::log(s);
        }
        return total;
    }

    double sum_row_lse(double sigma) const {
        const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
        double total = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            double mx = kNegInf;
            for (std::size_t j = 0; j < m_; ++j) mx = std::max(mx, logp_[j] - d2x_[i * m_ + j] * inv2s2);
            double s = 0.0;
            for (std::size_t j = 0; j < m_; ++j) s += std::exp(logp_[j] - d2x_[i * m_ + j] * inv2s2 - mx);
            total += mx + std::log(s);
        }
        return total;
    }

    const Dataset& data_;
    const PriorConfig& prior_;
    LikelihoodMode mode_;
    MixtureState state_;
    std::size_t n_ = 0, m_ = 0;
    std::vector<std::size_t> alloc_, counts_;
    std::vector<double> logp_, d2x_, d2y_, E_, c_, S_;
    std::vector<double> scratch_;
    BlockTally refresh_tally_;  // independence moves; not reported
    std::vector<double> new_d2_, new_e_, new_s_;

    friend class ChainRunner;
};

// ---------------------------------------------------------------------------

std::vector<double> sample_sticks_conjugate(std::span<const std::size_t> counts, double c0, RngStream& rng) {
    if (counts.empty()) throw DomainError("no components");
    std::size_t later = 0;
    for (std::size_t c : counts) later += c;
    std::vector<double> sticks(counts.size(), 1.0);
    for (std::size_t j = 0; j + 1 < counts.size(); ++j) {
        later -= counts[j];
        const double v = sample_beta(1.0 + static_cast<double>(counts[j]), c0 + static_cast<double>(later), rng);
        sticks[j] = std::clamp(v, kStickMin, kStickMax);
    }
    return sticks;
}

std::vector<std::size_t> sample_allocations(const MixtureState& state, const Dataset& data,
                                            RngStream& rng) {
    state.validate();
    if (data.d_x != state.d_x || data.d_y != state.d_y) throw DomainError("data and state dimensions differ");
    const std::size_t m = state.size();
    std::vector<double> logw(m);
    std::vector<std::size_t> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            logw[j] = state.weights[j] > 0.0
                          ? std::log(state.weights[j]) -
                                (squared_distance(data.x_row(i), state.atom_x(j)) +
                                 squared_distance(data.y_row(i), state.atom_y(j))) /
                                    (2.0 * state.sigma * state.sigma)
                          : kNegInf;
        }
        const double lse = log_sum_exp(logw);
        const double u = rng.uniform();
        double acc = 0.0;
        std::size_t pick = m - 1;
        for (std::size_t j = 0; j < m; ++j) {
            acc += std::exp(logw[j] - lse);
            if (u < acc) {
                pick = j;
                break;
            }
        }
        while (logw[pick] == kNegInf && pick > 0) --pick;
        out[i] = pick;
    }
    return out;
}

std::vector<double> update_mu_y(const MixtureState& state, std::span<const std::size_t> allocations,
                                const Dataset& data, const HyperParams& gamma, RngStream& rng) {
    if (allocations.size() != data.size()) throw DomainError("allocations and data lengths differ");
    const std::size_t m = state.size(), dy = state.d_y;
    std::vector<double> sum(m * dy, 0.0);
    std::vector<std::size_t> count(m, 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t j = allocations[i];
        ++count.at(j);
        const auto yi = data.y_row(i);
        for (std::size_t k = 0; k < dy; ++k) sum[j * dy + k] += yi[k];
    }
    const double s2 = state.sigma * state.sigma;
    std::vector<double> out(m * dy);
    for (std::size_t j = 0; j < m; ++j) {
        const double precision = 1.0 / gamma.tau2 + static_cast<double>(count[j]) / s2;
        const double sd = 1.0 / std::sqrt(precision);
        for (std::size_t k = 0; k < dy; ++k) {
            const double mean = (gamma.lambda[k] / gamma.tau2 + sum[j * dy + k] / s2) / precision;
            out[j * dy + k] = mean + sd * rng.normal();
        }
    }
    return out;
}

MixtureState gibbs_sweep(const MixtureState& state, const Dataset& data, const PriorConfig& prior,
                         const ChainConfig& config, RngStream& rng) {
    state.validate();
    prior.validate();
    Sampler sampler(data, prior, config.mode, state);
    BlockTally tally;
    sampler.sweep(rng, config.proposal_scales, tally);
    return sampler.state();
}

double log_posterior(const MixtureState& state, const Dataset& data, const PriorConfig& prior,
                     LikelihoodMode mode) {
    double lp = log_prior(state, prior);
    for (std::size_t i = 0; i < data.size(); ++i) {
        lp += mode == LikelihoodMode::conditional_likelihood
                  ? log_conditional_density(state, data.x_row(i), data.y_row(i))
                  : log_joint_density(state, data.x_row(i), data.y_row(i));
    }
    return lp;
}

double effective_sample_size(std::span<const double> trace) {
    const std::size_t n = trace.size();
    if (n < 4) return static_cast<double>(n);
    double mean = 0.0;
    for (double v : trace) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : trace) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    if (!(var > 0.0)) return static_cast<double>(n);

    auto rho = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) s += (trace[i] - mean) * (trace[i + lag] - mean);
        return s / (static_cast<double>(n) * var);
    };
    // Geyer's initial positive sequence on pair sums
    double tau = -1.0;
    for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
        const double pair = rho(2 * m) + rho(2 * m + 1);
        if (pair <= 0.0) break;
        tau += 2.0 * pair;
    }
    tau = std::max(tau, 1.0 / static_cast<double>(n));
    return std::min(static_cast<double>(n) / tau, static_cast<double>(n));
}

// ---------------------------------------------------------------------------

namespace {

MixtureState initial_state(const Dataset& data, const PriorConfig& prior, RngStream& rng) {
    MixtureState s = sample_prior_state(prior, rng);
    for (std::size_t j = 0; j + 1 < s.size(); ++j) s.sticks[j] = std::clamp(s.sticks[j], kStickMin, kStickMax);
    s.weights = stick_break(s.sticks);
    if (data.empty()) return s;
    // start atoms at data points; sigma at its prior mean
    for (std::size_t j = 0; j < s.size(); ++j) {
        const std::size_t i = static_cast<std::size_t>(rng.next_u64() % data.size());
        std::copy_n(data.x_row(i).begin(), s.d_x, s.atom_x(j).begin());
        std::copy_n(data.y_row(i).begin(), s.d_y, s.atom_y(j).begin());
    }
    s.sigma = prior.gamma.beta_scale / (prior.alpha_shape - 1.0);
    return s;
}

} // namespace

ChainRunner::ChainRunner(const Dataset& data, const PriorConfig& prior, const ChainConfig& config)
    : data_(data), prior_(prior), config_(config), rng_(config.seed, 0),
      accepted_(kBlocks, 0), proposed_(kBlocks, 0), batch_accepted_(kBlocks, 0),
      batch_proposed_(kBlocks, 0) {
    prior_.validate();
    config_.validate();
    if (!data.empty() && (data.d_x != prior.d_x || data.d_y != prior.d_y)) {
        throw ConfigError("data dimensions do not match the prior");
    }
    RngStream init_rng(config.seed, 1);
    sampler_ = std::make_unique<Sampler>(data_, prior_, config_.mode, initial_state(data, prior_, init_rng));
    draws_.mode = config_.mode;
    draws_.gamma_used = prior_.gamma;
    draws_.final_scales = config_.proposal_scales;
}

ChainRunner::ChainRunner(const Dataset& data, const PriorConfig& prior, const ChainConfig& config,
                         const ChainCheckpoint& checkpoint, PosteriorDraws so_far)
    : data_(data), prior_(prior), config_(config), rng_(RngStream::deserialize(checkpoint.rng_state)),
      next_iteration_(checkpoint.next_iteration), accepted_(checkpoint.accepted),
      proposed_(checkpoint.proposed), batch_accepted_(checkpoint.batch_accepted),
      batch_proposed_(checkpoint.batch_proposed), draws_(std::move(so_far)) {
    prior_.validate();
    config_.validate();
    checkpoint.state.validate();
    if (accepted_.size() != kBlocks || proposed_.size() != kBlocks || batch_accepted_.size() != kBlocks ||
        batch_proposed_.size() != kBlocks) {
        throw ParseError("checkpoint tallies malformed");
    }
    sampler_ = std::make_unique<Sampler>(data_, prior_, config_.mode, checkpoint.state);
    draws_.mode = config_.mode;
    draws_.gamma_used = prior_.gamma;
    draws_.final_scales = checkpoint.scales;
}

ChainRunner::~ChainRunner() = default;

void ChainRunner::run_until(std::size_t iteration) {
    iteration = std::min(iteration, config_.iterations);
    const auto start = std::chrono::steady_clock::now();
    while (next_iteration_ < iteration) {
        step();
        if (config_.timeout_seconds > 0.0 && next_iteration_ % 64 == 0) {
            const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
            if (elapsed.count() > config_.timeout_seconds) {
                throw TimeoutError("chain exceeded " + std::to_string(config_.timeout_seconds) + " s");
            }
        }
    }
}

void ChainRunner::step() {
    const std::size_t it = next_iteration_;
    BlockTally tally;
    sampler_->sweep(rng_, draws_.final_scales, tally);
    for (std::size_t b = 0; b < kBlocks; ++b) {
        if (it >= config_.burn_in) {
            accepted_[b] += tally.accepted[b];
            proposed_[b] += tally.proposed[b];
        } else if (config_.adapt_burnin) {
            batch_accepted_[b] += tally.accepted[b];
            batch_proposed_[b] += tally.proposed[b];
        }
    }
    if (it < config_.burn_in && config_.adapt_burnin && (it + 1) % kAdaptBatch == 0) {
        double* steps[kBlocks] = {&draws_.final_scales.log_sigma_step, &draws_.final_scales.mu_x_step,
                                  &draws_.final_scales.stick_logit_step};
        const double caps[kBlocks] = {10.0, 1.0, 20.0};
        for (std::size_t b = 0; b < kBlocks; ++b) {
            if (batch_proposed_[b] == 0) continue;
            const double rate = static_cast<double>(batch_accepted_[b]) / static_cast<double>(batch_proposed_[b]);
            if (rate < 0.2) *steps[b] *= 0.8;
            else if (rate > 0.4) *steps[b] = std::min(*steps[b] * 1.25, caps[b]);
            batch_accepted_[b] = 0;
            batch_proposed_[b] = 0;
        }
    }
    if (it >= config_.burn_in && (it - config_.burn_in) % config_.thin == 0) {
        const MixtureState& s = sampler_->state();
        draws_.draws.push_back(s);
        draws_.iterations.push_back(it);
        draws_.log_posterior.push_back(log_posterior(s, data_, prior_, config_.mode));
    }
    ++next_iteration_;
}

ChainCheckpoint ChainRunner::checkpoint() const {
    ChainCheckpoint c;
    c.state = sampler_->state();
    c.rng_state = rng_.serialize();
    c.next_iteration = next_iteration_;
    c.scales = draws_.final_scales;
    c.accepted = accepted_;
    c.proposed = proposed_;
    c.batch_accepted = batch_accepted_;
    c.batch_proposed = batch_proposed_;
    return c;
}

PosteriorDraws ChainRunner::finish() const {
    PosteriorDraws out = draws_;
    if (out.draws.empty()) throw ConfigError("chain has no retained draws");
    auto rate = [&](std::size_t b) {
        return proposed_[b] == 0 ? 1.0 : static_cast<double>(accepted_[b]) / static_cast<double>(proposed_[b]);
    };
    out.acceptance_rates = {rate(kSigma), rate(kMuX), rate(kSticks)};
    std::vector<double> trace;
    trace.reserve(out.draws.size());
    for (const auto& s : out.draws) trace.push_back(s.sigma);
    out.ess_sigma = effective_sample_size(trace);
    return out;
}

PosteriorDraws run_chain(const Dataset& data, const PriorConfig& prior, const ChainConfig& config) {
    ChainRunner runner(data, prior, config);
    runner.run_until(config.iterations);
    return runner.finish();
}

} // namespace condense
