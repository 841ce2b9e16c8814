#include "dicholin/sequence.hpp"

#include <cmath>
#include <string>

namespace dicholin {

ItineraryMap ItineraryMap::periodic(std::vector<int> pattern, long anchor) {
    if (pattern.empty()) throw ConfigError("itinerary pattern must be non-empty");
    ItineraryMap m;
    m.kind = Kind::Periodic;
    m.anchor = anchor;
    m.letters = std::move(pattern);
    return m;
}

ItineraryMap ItineraryMap::windowed(long n_min, std::vector<int> letters) {
    if (letters.empty()) throw ConfigError("itinerary window must be non-empty");
    ItineraryMap m;
    m.kind = Kind::Windowed;
    m.anchor = n_min;
    m.letters = std::move(letters);
    return m;
}

int ItineraryMap::at(long n) const {
    const long len = static_cast<long>(letters.size());
    if (kind == Kind::Periodic) {
        long r = (n - anchor) % len;
        if (r < 0) r += len;
        return letters[static_cast<size_t>(r)];
    }
    long k = n < anchor ? anchor : (n > anchor + len - 1 ? anchor + len - 1 : n);
    return letters[static_cast<size_t>(k - anchor)];
}

std::pair<long, long> ItineraryMap::support_window() const {
    const long len = static_cast<long>(letters.size());
    return {anchor, anchor + len - 1};
}

namespace {

int space_dim_of(const std::vector<Op>& ops) {
    // All operators must agree on the state space. Shifts force the bilateral
    // space; any dense-dimension operator forces R^d; shape-generic scaled
    // identities adapt to either.
    bool any_biseq = false;
    int dim = 0;
    for (const Op& o : ops) {
        if (o.acts_on_biseq()) any_biseq = true;
        else if (o.dense_dim() != 0) {
            if (dim != 0 && dim != o.dense_dim())
                throw ShapeError("operator sequence mixes dense dimensions " +
                                 std::to_string(dim) + " and " + std::to_string(o.dense_dim()));
            dim = o.dense_dim();
        }
    }
    if (any_biseq && dim != 0)
        throw ShapeError("operator sequence mixes bilateral and dense operators");
    return dim;
}

} // namespace

OperatorSequence OperatorSequence::constant(Op a) {
    OperatorSequence s;
    s.ops_.push_back(std::move(a));
    s.map_ = ItineraryMap::windowed(0, {0});
    s.dim_ = space_dim_of(s.ops_);
    return s;
}

OperatorSequence OperatorSequence::windowed(long n_min, std::vector<Op> ops) {
    if (ops.empty()) throw ConfigError("operator window must be non-empty");
    OperatorSequence s;
    std::vector<int> idx(ops.size());
    for (size_t i = 0; i < ops.size(); ++i) idx[i] = static_cast<int>(i);
    s.ops_ = std::move(ops);
    s.map_ = ItineraryMap::windowed(n_min, std::move(idx));
    s.dim_ = space_dim_of(s.ops_);
    return s;
}

OperatorSequence OperatorSequence::itinerary(std::vector<Op> alphabet, ItineraryMap map) {
    if (alphabet.empty()) throw ConfigError("itinerary alphabet must be non-empty");
    for (int l : map.letters)
        if (l < 0 || l >= static_cast<int>(alphabet.size()))
            throw ConfigError("itinerary letter " + std::to_string(l) + " out of range");
    OperatorSequence s;
    s.ops_ = std::move(alphabet);
    s.map_ = std::move(map);
    s.dim_ = space_dim_of(s.ops_);
    return s;
}

const Op& OperatorSequence::at(long n) const {
    return ops_[static_cast<size_t>(map_.at(n))];
}

std::pair<long, long> OperatorSequence::canonical_window() const {
    auto [a, b] = map_.support_window();
    // Windowed maps clamp, so the support window already realizes the tails.
    return {a, b};
}

Vec transition(const OperatorSequence& seq, long m, long n, Vec v) {
    if (m >= n) {
        for (long k = n; k < m; ++k) v = seq.at(k).apply(v);
    } else {
        for (long k = n - 1; k >= m; --k) v = seq.at(k).apply_inverse(v);
    }
    return v;
}

double growth_bound(const OperatorSequence& seq, long n0, long n1, Norm p) {
    if (n0 > n1) throw ConfigError("growth bound window is empty");
    double rho = 0.0; // clamp at 0: a one-step bound below 1 still gives e^{rho} >= 1
    for (long n = n0; n <= n1; ++n) {
        const Op& a = seq.at(n);
        rho = std::max(rho, std::log(a.op_norm(p)));
        rho = std::max(rho, std::log(a.inv_norm(p)));
    }
    return rho;
}

} // namespace dicholin
