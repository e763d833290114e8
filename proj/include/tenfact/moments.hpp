#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tenfact/factorize.hpp"
#include "tenfact/tensor.hpp"

namespace tenfact {

class Rng;

/// Single topic model: topic prior pi over k topics, each topic a word
/// distribution over a d-word vocabulary (column-stochastic topics matrix).
struct TopicModel {
    Vector prior;   // length k, nonnegative, sums to 1
    Matrix topics;  // d x k, columns nonnegative, each summing to 1

    int rank() const { return static_cast<int>(prior.size()); }
    int vocab() const { return static_cast<int>(topics.rows()); }
    void validate() const;
};

/// Three-word documents, word indices in [0, vocab).
struct Corpus {
    int vocab = 0;
    std::vector<std::array<int, 3>> docs;
};

/// Draws a random topic model: prior and topic columns from flat Dirichlet.
TopicModel random_topic_model(int d, int k, Rng& rng);

/// n i.i.d. documents: a topic from the prior, then three words i.i.d. from
/// the topic's word distribution. Deterministic in seed.
Corpus generate_corpus(const TopicModel& model, int n, std::uint64_t seed);

/// Empirical third moment: T[a,b,c] = #docs with words (a,b,c) / n.
Tensor3 empirical_tensor(const Corpus& corpus);

struct TopicEstimate {
    TopicModel model;
    FactorizationReport report;
};

/// Symmetrizes the empirical tensor, runs the non-orthogonal two-stage
/// factorizer and projects the estimate back onto the simplex
/// (clip negatives, renormalize).
TopicEstimate estimate_topic_model(const Corpus& corpus, int k, FactorizeOptions opts);

/// Prior and topic errors of the estimate against the ground truth, after
/// optimal matching of topic columns by l1 distance.
struct TopicErrors {
    double topic_l1 = 0.0;  // mean aligned l1 topic error
    double prior_l1 = 0.0;  // |pi~ - pi|_1 under the same matching
};
TopicErrors topic_model_error(const TopicModel& truth, const TopicModel& estimate);

// Corpus files: "CORPUS d n" then n lines of three zero-based indices.
void write_corpus(std::ostream& os, const Corpus& corpus);
Corpus read_corpus(std::istream& is);

}  // namespace tenfact
