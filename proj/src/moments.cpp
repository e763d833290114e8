#include "tenfact/moments.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "tenfact/analysis.hpp"
#include "tenfact/rng.hpp"

namespace tenfact {

void TopicModel::validate() const {
    const int k = rank();
    const int d = vocab();
    if (topics.cols() != k) throw std::invalid_argument("TopicModel: shape mismatch");
    double psum = 0.0;
    for (int i = 0; i < k; ++i) {
        if (prior[i] < 0.0) throw std::invalid_argument("TopicModel: negative prior");
        psum += prior[i];
    }
    if (std::abs(psum - 1.0) > 1e-12)
        throw std::invalid_argument("TopicModel: prior does not sum to 1");
    for (int i = 0; i < k; ++i) {
        double csum = 0.0;
        for (int w = 0; w < d; ++w) {
            if (topics(w, i) < 0.0) throw std::invalid_argument("TopicModel: negative entry");
            csum += topics(w, i);
        }
        if (std::abs(csum - 1.0) > 1e-12)
            throw std::invalid_argument("TopicModel: topic does not sum to 1");
    }
}

namespace {

Vector dirichlet_flat(int n, Rng& rng) {
    Vector v(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        v[i] = -std::log(1.0 - rng.uniform());  // Exp(1)
        sum += v[i];
    }
    return v / sum;
}

int sample_categorical(const Vector& probs, Rng& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    for (int i = 0; i + 1 < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return static_cast<int>(probs.size()) - 1;
}

}  // namespace

TopicModel random_topic_model(int d, int k, Rng& rng) {
    if (k < 1 || k > d) throw std::invalid_argument("random_topic_model: bad rank");
    TopicModel m;
    m.prior = dirichlet_flat(k, rng);
    m.topics = Matrix(d, k);
    for (int i = 0; i < k; ++i) m.topics.col(i) = dirichlet_flat(d, rng);
    return m;
}

Corpus generate_corpus(const TopicModel& model, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate_corpus: n must be >= 1");
    model.validate();
    Rng rng = Rng(seed).derive(0xc0a9);
    Corpus corpus;
    corpus.vocab = model.vocab();
    corpus.docs.reserve(n);
    for (int doc = 0; doc < n; ++doc) {
        int topic = sample_categorical(model.prior, rng);
        std::array<int, 3> words;
        for (int w = 0; w < 3; ++w)
            words[w] = sample_categorical(model.topics.col(topic), rng);
        corpus.docs.push_back(words);
    }
    return corpus;
}

Tensor3 empirical_tensor(const Corpus& corpus) {
    if (corpus.docs.empty()) throw std::invalid_argument("empirical_tensor: empty corpus");
    const int d = corpus.vocab;
    Tensor3 T(d, d, d);
    const double unit = 1.0 / static_cast<double>(corpus.docs.size());
    for (const auto& doc : corpus.docs) {
        for (int w : doc)
            if (w < 0 || w >= d)
                throw std::invalid_argument("empirical_tensor: word index out of range");
        T(doc[0], doc[1], doc[2]) += unit;
    }
    return T;
}

namespace {

Vector simplex_clip(const Vector& v) {
    Vector out = v.cwiseMax(0.0);
    double sum = out.sum();
    if (sum <= 0.0) return Vector::Constant(v.size(), 1.0 / v.size());
    return out / sum;
}

}  // namespace

TopicEstimate estimate_topic_model(const Corpus& corpus, int k, FactorizeOptions opts) {
    if (k < 1 || k > corpus.vocab)
        throw std::invalid_argument("estimate_topic_model: bad rank");
    Tensor3 T = empirical_tensor(corpus);
    // word order within a document is exchangeable; symmetrize the estimate
    const int d = corpus.vocab;
    Tensor3 sym(d, d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int l = 0; l < d; ++l)
                sym(i, j, l) = (T(i, j, l) + T(i, l, j) + T(j, i, l) + T(j, l, i) +
                                T(l, i, j) + T(l, j, i)) /
                               6.0;

    opts.rank = k;
    opts.mode = FactorizeMode::NonOrthogonal;
    TopicEstimate out;
    out.report = two_stage_factorize(sym, opts);

    const CPModel& est = out.report.estimate;
    Matrix topics(d, k);
    Vector prior(k);
    for (int i = 0; i < k; ++i) {
        // orient the column toward nonnegative mass before clipping
        Vector col = est.A.col(i);
        if (col.sum() < 0.0) col = -col;
        Vector t = simplex_clip(col);
        topics.col(i) = t;
        // pi u^3 with u rescaled to sum 1 scales pi by (sum u)^3
        double s = col.cwiseMax(0.0).sum();
        prior[i] = est.weights[i] * s * s * s;
    }
    out.model.prior = simplex_clip(prior);
    out.model.topics = topics;
    out.model.validate();
    return out;
}

TopicErrors topic_model_error(const TopicModel& truth, const TopicModel& estimate) {
    const int k = truth.rank();
    if (estimate.rank() < k)
        throw std::invalid_argument("topic_model_error: estimate rank too small");
    Matrix cost(k, estimate.rank());
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < estimate.rank(); ++j)
            cost(i, j) = (truth.topics.col(i) - estimate.topics.col(j)).lpNorm<1>();
    std::vector<int> match = min_cost_assignment(cost);
    TopicErrors err;
    for (int i = 0; i < k; ++i) {
        err.topic_l1 += cost(i, match[i]);
        err.prior_l1 += std::abs(truth.prior[i] - estimate.prior[match[i]]);
    }
    err.topic_l1 /= k;
    return err;
}

void write_corpus(std::ostream& os, const Corpus& corpus) {
    os << "CORPUS " << corpus.vocab << ' ' << corpus.docs.size() << '\n';
    for (const auto& doc : corpus.docs)
        os << doc[0] << ' ' << doc[1] << ' ' << doc[2] << '\n';
}

Corpus read_corpus(std::istream& is) {
    std::string tag;
    if (!(is >> tag) || tag != "CORPUS")
        throw std::runtime_error("decode: expected CORPUS header");
    long long d, n;
    if (!(is >> d >> n) || d <= 0 || n < 0)
        throw std::runtime_error("decode: malformed CORPUS header");
    Corpus corpus;
    corpus.vocab = static_cast<int>(d);
    corpus.docs.reserve(n);
    for (long long i = 0; i < n; ++i) {
        std::array<int, 3> doc;
        if (!(is >> doc[0] >> doc[1] >> doc[2]))
            throw std::runtime_error("decode: truncated corpus");
        for (int w : doc)
            if (w < 0 || w >= corpus.vocab)
                throw std::runtime_error("decode: word index out of range");
        corpus.docs.push_back(doc);
    }
    return corpus;
}

}  // namespace tenfact
