#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace xrmdn::ad {

/// Scalar reverse-mode tape. Every node keeps at most two parents with the
/// local partial derivative already evaluated, so the backward sweep is a
/// single reverse pass over the node array.
class Tape {
public:
    struct Node {
        double value;
        double pg0, pg1;
        std::int32_t p0, p1;
    };

    std::int32_t leaf(double value) { return push(value, -1, -1, 0.0, 0.0); }

    std::int32_t unary(std::int32_t p, double pgrad, double value) {
        return push(value, p, -1, pgrad, 0.0);
    }

    std::int32_t binary(std::int32_t p0, std::int32_t p1, double pg0, double pg1, double value) {
        return push(value, p0, p1, pg0, pg1);
    }

    [[nodiscard]] double value(std::int32_t idx) const { return nodes_[static_cast<std::size_t>(idx)].value; }
    [[nodiscard]] std::size_t size() const { return nodes_.size(); }

    void clear() { nodes_.clear(); }
    void reserve(std::size_t n) { nodes_.reserve(n); }

    /// Fills grads with d(root)/d(node) for every node on the tape.
    void backward(std::int32_t root, std::vector<double>& grads) const {
        grads.assign(nodes_.size(), 0.0);
        grads[static_cast<std::size_t>(root)] = 1.0;
        for (std::int32_t i = root; i >= 0; --i) {
            const double g = grads[static_cast<std::size_t>(i)];
            if (g == 0.0) continue;
            const Node& n = nodes_[static_cast<std::size_t>(i)];
            if (n.p0 >= 0) grads[static_cast<std::size_t>(n.p0)] += g * n.pg0;
            if (n.p1 >= 0) grads[static_cast<std::size_t>(n.p1)] += g * n.pg1;
        }
    }

private:
    std::int32_t push(double value, std::int32_t p0, std::int32_t p1, double pg0, double pg1) {
        nodes_.push_back(Node{value, pg0, pg1, p0, p1});
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    std::vector<Node> nodes_;
};

/// Handle to one tape node; behaves like a double under the arithmetic and
/// transcendental operations the forward pass needs.
class Var {
public:
    Var() = default;
    Var(Tape* tape, std::int32_t idx) : tape_(tape), idx_(idx) {}

    [[nodiscard]] double value() const { return tape_->value(idx_); }
    [[nodiscard]] Tape* tape() const { return tape_; }
    [[nodiscard]] std::int32_t index() const { return idx_; }

private:
    Tape* tape_ = nullptr;
    std::int32_t idx_ = -1;
};

inline Var make_leaf(Tape& tape, double value) { return Var(&tape, tape.leaf(value)); }

inline double value_of(const Var& v) { return v.value(); }

inline Var operator+(const Var& a, const Var& b) {
    return Var(a.tape(), a.tape()->binary(a.index(), b.index(), 1.0, 1.0, a.value() + b.value()));
}

inline Var operator-(const Var& a, const Var& b) {
    return Var(a.tape(), a.tape()->binary(a.index(), b.index(), 1.0, -1.0, a.value() - b.value()));
}

inline Var operator*(const Var& a, const Var& b) {
    return Var(a.tape(),
               a.tape()->binary(a.index(), b.index(), b.value(), a.value(), a.value() * b.value()));
}

inline Var operator/(const Var& a, const Var& b) {
    const double bv = b.value();
    return Var(a.tape(), a.tape()->binary(a.index(), b.index(), 1.0 / bv,
                                          -a.value() / (bv * bv), a.value() / bv));
}

inline Var operator+(const Var& a, double c) {
    return Var(a.tape(), a.tape()->unary(a.index(), 1.0, a.value() + c));
}
inline Var operator+(double c, const Var& a) { return a + c; }

inline Var operator-(const Var& a, double c) { return a + (-c); }
inline Var operator-(double c, const Var& a) {
    return Var(a.tape(), a.tape()->unary(a.index(), -1.0, c - a.value()));
}

inline Var operator*(const Var& a, double c) {
    return Var(a.tape(), a.tape()->unary(a.index(), c, a.value() * c));
}
inline Var operator*(double c, const Var& a) { return a * c; }

inline Var operator/(const Var& a, double c) { return a * (1.0 / c); }
inline Var operator/(double c, const Var& a) {
    const double av = a.value();
    return Var(a.tape(), a.tape()->unary(a.index(), -c / (av * av), c / av));
}

inline Var operator-(const Var& a) {
    return Var(a.tape(), a.tape()->unary(a.index(), -1.0, -a.value()));
}

inline Var tanh(const Var& a) {
    const double t = std::tanh(a.value());
    return Var(a.tape(), a.tape()->unary(a.index(), 1.0 - t * t, t));
}

inline Var exp(const Var& a) {
    const double e = std::exp(a.value());
    return Var(a.tape(), a.tape()->unary(a.index(), e, e));
}

inline Var log(const Var& a) {
    return Var(a.tape(), a.tape()->unary(a.index(), 1.0 / a.value(), std::log(a.value())));
}

inline Var sqrt(const Var& a) {
    const double s = std::sqrt(a.value());
    return Var(a.tape(), a.tape()->unary(a.index(), 0.5 / s, s));
}

}  // namespace xrmdn::ad
