#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace restake::randnet {

// Stochastic block model over a bipartite operators x services graph.
// R = 1 service block with one background operator block is Erdos-Renyi.
struct SbmModel {
    struct ServiceBlock {
        std::size_t count = 0;  // m_b services
        double alpha = 0;       // collusion threshold for the block
        double pi = 0;          // per-service attack profit (used by PNL)
    };
    std::vector<ServiceBlock> service_blocks;
    std::vector<std::size_t> operator_counts;    // background operators n_c per block
    std::vector<std::vector<double>> p;          // p[c][b], operator block c -> service block b
    double sigma_bar = 1.0;                      // background stake per operator
    std::vector<double> attacker_p;              // attacker connectivity p_a[b]

    std::size_t block_count() const { return service_blocks.size(); }
    bool is_er() const { return service_blocks.size() == 1; }
    void validate() const;  // throws "config-error"
};

// Gaussian summary of the background stake per service block plus the
// attacker's block-sampling weights.
struct ClearanceModel {
    struct Block {
        double mu = 0;      // expected background stake
        double sigma = 0;   // its standard deviation
        double alpha = 0;
        double pi = 0;
        double weight = 0;  // w_b = p_ab / sum_c p_ac
        double inflection() const;  // T_b = alpha/(1-alpha) * mu
    };
    std::vector<Block> blocks;

    // gamma = p_min = sum_b w_b q_b(0): the floor of the per-identity success.
    double success_floor() const;
};

ClearanceModel derive_clearance(const SbmModel& model);

// Phi(z) via the complementary error function; |error| well below 1e-9 on
// |z| <= 8.
double normal_cdf(double z);

// q_b(y): probability that stake y clears a block-b service threshold.
// Throws "alpha-degenerate" for alpha in {0, 1}.
double clearance(const ClearanceModel& m, std::size_t block, double y);

// p(x) = sum_b w_b q_b(x).
double success_single(const ClearanceModel& m, double x);

// p_k(x) = sum_b w_b q_b(x/k).
double success_k_identity(const ClearanceModel& m, double x, int k);

// p'(x;k) = 1 - (1 - p_k(x))^k under independent per-identity trials.
double success_sybil(const ClearanceModel& m, double x, int k, bool assume_independence = true);

enum class Curvature { Convex, Concave, Inflection };

struct ConcavityRegime {
    double inflection;  // T_b
    Curvature classify(double y) const;
};
ConcavityRegime concavity_regime(const ClearanceModel& m, std::size_t block);

struct SybilCountRow {
    int k;
    double p_k;
    double p_prime;
    double threshold;  // ln(1-p(x)) / ln(1-p_k(x)); advantage iff k > threshold
    bool advantage;
};

struct SybilCountResult {
    std::optional<int> k_star;             // least k in [2, k_max] with p'(x;k) > p(x)
    std::vector<SybilCountRow> table;
    double p_single;
    double p_min;                          // = success floor
    std::optional<int> sufficient_bound;   // ceil(ln(1-p)/ln(1-p_min)) when defined
    int k_max;
};

SybilCountResult min_sybil_count(const ClearanceModel& m, double x, int k_max = 64);

// Mean-field expected PNL, Erdos-Renyi: (pi - alpha mu)(x/mu) q(x/k).
// Throws "not-ER" when the model has more than one block.
double expected_pnl_er(const ClearanceModel& m, double x, double pi, int k = 1);

// Mean-field expected PNL, SBM: sum_b w_b (pi_b - alpha_b mu_b)(x/mu_b) q_b(x/k).
// For k >= 2 this is the stated lower bound. pi_override replaces block profits.
double expected_pnl_sbm(const ClearanceModel& m, double x, int k = 1,
                        const std::vector<double>* pi_override = nullptr);

// Deterministic PNL for a realized coalition:
//   sum_s pi_s x_v / sigma_{B_s}  -  x_v * max_s phi_s.
struct PnlService {
    double pi;
    double coalition_stake;  // sigma_{B_s} including the attacker
    double phi;              // slashing factor at s
};
double pnl_point(double x_v, const std::vector<PnlService>& services);

}  // namespace restake::randnet
