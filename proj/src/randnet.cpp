#include "restake/randnet.hpp"

#include <cmath>
#include <limits>

#include "restake/error.hpp"

namespace restake::randnet {

void SbmModel::validate() const {
    if (service_blocks.empty()) throw Error("config-error", "at least one service block required");
    if (operator_counts.empty()) throw Error("config-error", "at least one operator block required");
    if (sigma_bar <= 0) throw Error("config-error", "sigma_bar must be positive");
    if (p.size() != operator_counts.size())
        throw Error("config-error", "connection matrix rows must match operator blocks");
    for (const auto& row : p) {
        if (row.size() != service_blocks.size())
            throw Error("config-error", "connection matrix columns must match service blocks");
        for (double v : row)
            if (v < 0 || v > 1) throw Error("config-error", "connection probability outside [0,1]");
    }
    if (attacker_p.size() != service_blocks.size())
        throw Error("config-error", "attacker_p must have one entry per service block");
    for (double v : attacker_p)
        if (v < 0 || v > 1) throw Error("config-error", "attacker probability outside [0,1]");
    for (const auto& b : service_blocks)
        if (b.alpha < 0 || b.alpha > 1) throw Error("config-error", "alpha outside [0,1]");
}

double ClearanceModel::Block::inflection() const {
    return alpha / (1.0 - alpha) * mu;
}

double ClearanceModel::success_floor() const {
    double total = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& blk = blocks[b];
        double q0 = blk.sigma > 0 ? normal_cdf(-blk.mu / blk.sigma) : (blk.mu <= 0 ? 1.0 : 0.0);
        total += blk.weight * q0;
    }
    return total;
}

ClearanceModel derive_clearance(const SbmModel& model) {
    model.validate();
    ClearanceModel out;
    double attacker_total = 0;
    for (double v : model.attacker_p) attacker_total += v;
    if (attacker_total <= 0)
        throw Error("config-error", "attacker needs positive connectivity to normalize weights");
    for (std::size_t b = 0; b < model.block_count(); ++b) {
        ClearanceModel::Block blk;
        blk.alpha = model.service_blocks[b].alpha;
        blk.pi = model.service_blocks[b].pi;
        blk.weight = model.attacker_p[b] / attacker_total;
        double var = 0;
        for (std::size_t c = 0; c < model.operator_counts.size(); ++c) {
            double n = static_cast<double>(model.operator_counts[c]);
            double pcb = model.p[c][b];
            blk.mu += n * pcb * model.sigma_bar;
            var += n * pcb * (1.0 - pcb) * model.sigma_bar * model.sigma_bar;
        }
        blk.sigma = std::sqrt(var);
        out.blocks.push_back(blk);
    }
    return out;
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double clearance(const ClearanceModel& m, std::size_t block, double y) {
    if (block >= m.blocks.size()) throw Error("config-error", "block index out of range");
    const auto& blk = m.blocks[block];
    if (blk.alpha <= 0 || blk.alpha >= 1)
        throw Error("alpha-degenerate", "clearance needs alpha in (0,1)");
    double bound = (1.0 - blk.alpha) / blk.alpha * y;
    if (blk.sigma <= 0) return bound > blk.mu ? 1.0 : (bound < blk.mu ? 0.0 : 0.5);
    return normal_cdf((bound - blk.mu) / blk.sigma);
}

double success_single(const ClearanceModel& m, double x) {
    double total = 0;
    for (std::size_t b = 0; b < m.blocks.size(); ++b)
        total += m.blocks[b].weight * clearance(m, b, x);
    return total;
}

double success_k_identity(const ClearanceModel& m, double x, int k) {
    if (k < 1) throw Error("config-error", "k must be >= 1");
    double total = 0;
    for (std::size_t b = 0; b < m.blocks.size(); ++b)
        total += m.blocks[b].weight * clearance(m, b, x / k);
    return total;
}

double success_sybil(const ClearanceModel& m, double x, int k, bool assume_independence) {
    if (k < 1) throw Error("config-error", "k must be >= 1");
    double pk = success_k_identity(m, x, k);
    if (!assume_independence) return pk;  // conservative single-trial view
    if (pk >= 1.0) return 1.0;
    // 1 - (1 - pk)^k, computed in log space for tiny pk.
    return -std::expm1(static_cast<double>(k) * std::log1p(-pk));
}

Curvature ConcavityRegime::classify(double y) const {
    if (y < inflection) return Curvature::Convex;
    if (y > inflection) return Curvature::Concave;
    return Curvature::Inflection;
}

ConcavityRegime concavity_regime(const ClearanceModel& m, std::size_t block) {
    if (block >= m.blocks.size()) throw Error("config-error", "block index out of range");
    const auto& blk = m.blocks[block];
    if (blk.alpha <= 0 || blk.alpha >= 1)
        throw Error("alpha-degenerate", "concavity regime needs alpha in (0,1)");
    return ConcavityRegime{blk.inflection()};
}

SybilCountResult min_sybil_count(const ClearanceModel& m, double x, int k_max) {
    SybilCountResult out;
    out.k_max = k_max;
    out.p_single = success_single(m, x);
    out.p_min = m.success_floor();
    if (out.p_single < 1.0 && out.p_min > 0.0 && out.p_min < 1.0) {
        double bound = std::log1p(-out.p_single) / std::log1p(-out.p_min);
        out.sufficient_bound = static_cast<int>(std::ceil(bound));
    }
    for (int k = 2; k <= k_max; ++k) {
        SybilCountRow row;
        row.k = k;
        row.p_k = success_k_identity(m, x, k);
        row.p_prime = success_sybil(m, x, k);
        row.advantage = out.p_single < 1.0 && row.p_prime > out.p_single;
        row.threshold = (row.p_k > 0 && row.p_k < 1 && out.p_single < 1)
                            ? std::log1p(-out.p_single) / std::log1p(-row.p_k)
                            : std::numeric_limits<double>::infinity();
        if (row.advantage && !out.k_star) out.k_star = k;
        out.table.push_back(row);
    }
    return out;
}

double expected_pnl_er(const ClearanceModel& m, double x, double pi, int k) {
    if (m.blocks.size() != 1) throw Error("not-ER", "expected a single-block model");
    if (k < 1) throw Error("config-error", "k must be >= 1");
    const auto& blk = m.blocks[0];
    if (blk.mu <= 0) return 0;
    return (pi - blk.alpha * blk.mu) * (x / blk.mu) * clearance(m, 0, x / k);
}

double expected_pnl_sbm(const ClearanceModel& m, double x, int k,
                        const std::vector<double>* pi_override) {
    if (k < 1) throw Error("config-error", "k must be >= 1");
    if (pi_override && pi_override->size() != m.blocks.size())
        throw Error("config-error", "profit override must have one entry per block");
    double total = 0;
    for (std::size_t b = 0; b < m.blocks.size(); ++b) {
        const auto& blk = m.blocks[b];
        if (blk.mu <= 0) continue;
        double pi = pi_override ? (*pi_override)[b] : blk.pi;
        total += blk.weight * (pi - blk.alpha * blk.mu) * (x / blk.mu) * clearance(m, b, x / k);
    }
    return total;
}

double pnl_point(double x_v, const std::vector<PnlService>& services) {
    if (x_v < 0) throw Error("x-out-of-range", "stake must be nonnegative");
    if (x_v == 0) return 0;
    double profit = 0;
    double max_phi = 0;
    for (const auto& s : services) {
        if (s.coalition_stake <= 0)
            throw Error("zero-coalition-stake", "coalition stake must be positive");
        profit += s.pi * x_v / s.coalition_stake;
        max_phi = std::max(max_phi, s.phi);
    }
    return profit - x_v * max_phi;
}

}  // namespace restake::randnet
