#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "restake/graph.hpp"
#include "restake/randnet.hpp"

namespace restake::montecarlo {

enum class TargetPolicy { DistinctNeighbors, UniformWithReplacement };

// How the background stake behind each service is realized per replication.
// MeanField draws it from the model's Gaussian N(mu_b, sigma_b^2) and so
// validates everything downstream of the CLT step (weights, k-splitting,
// at-least-one-wins aggregation). Graph realizes Bernoulli edges and exact
// per-operator stakes; at small n_other its estimates differ from the
// Gaussian analytics by the approximation error itself.
enum class Background { MeanField, Graph };

struct SimConfig {
    randnet::SbmModel model;
    std::uint64_t replications = 10000;
    std::uint64_t seed = 0;
    double stake = 0;  // attacker stake x
    int sybils = 1;    // k identities of x/k each
    TargetPolicy policy = TargetPolicy::DistinctNeighbors;
    Background background = Background::MeanField;
    bool exclude_insufficient = false;  // default: count as failures
    double stake_jitter = 0;            // uniform +/- jitter on background stakes
    unsigned workers = 1;
};

struct SimEstimate {
    double estimate = 0;
    double std_error = 0;  // sqrt(p(1-p)/N)
    std::uint64_t replications = 0;
    std::uint64_t successes = 0;
    std::uint64_t insufficient = 0;  // replications lacking enough neighbors
};

// Independent per-replication stream derived from (seed, index); the same
// pair always yields the same stream regardless of worker count.
std::mt19937_64 replication_stream(std::uint64_t seed, std::uint64_t index);

// One full background graph draw: Bernoulli(p_cb) edges, stakes sigma_bar.
RestakingGraph sample_graph(const randnet::SbmModel& model, std::mt19937_64& rng);

// Empirical clearance for block b at stake y: the fraction of sampled
// background sums at or below (1-alpha)/alpha * y.
SimEstimate estimate_clearance(const SimConfig& config, std::size_t block, double y);

// Empirical at-least-one-wins probability for k identities of x/k.
SimEstimate estimate_success(const SimConfig& config);

struct NeighborCheck {
    std::size_t block;
    double threshold;       // half of the expected neighbor count
    double chernoff_bound;  // 1 - exp(-m_b p_ab / 8)
    double empirical;
    double std_error;
    bool ok;                // empirical >= bound - 3 SE
};
std::vector<NeighborCheck> neighbor_count_check(const SimConfig& config);

double z_score(const SimEstimate& estimate, double analytic);

}  // namespace restake::montecarlo
