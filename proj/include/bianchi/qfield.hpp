#pragma once

#include "bianchi/rational.hpp"

#include <string>

namespace bianchi {

// The imaginary quadratic field K = Q(sqrt(-m)) with ring of integers O_{-m},
// in the integral basis {1, w} where
//   w = sqrt(-m)               if m = 1, 2 mod 4,
//   w = -1/2 + sqrt(-m)/2      if m = 3 mod 4.
// The cases m = 1 and m = 3 (extra units) are rejected.
struct FieldCtx {
    long m = 0;
    bool three_mod_four = false;
    long discriminant = 0; // -m if m = 3 mod 4, else -4m
    Int omega_trace;       // w + conj(w):  0 or -1
    Int omega_norm;        // w * conj(w):  m or (1+m)/4

    explicit FieldCtx(long m);
};

// a + b*w with integer a, b.
struct AlgInt {
    Int a, b;

    AlgInt() : a(0), b(0) {}
    AlgInt(Int a_, Int b_) : a(std::move(a_)), b(std::move(b_)) {}
    AlgInt(long a_, long b_) : a(a_), b(b_) {}

    bool operator==(const AlgInt& o) const { return a == o.a && b == o.b; }
    bool operator!=(const AlgInt& o) const { return !(*this == o); }
    AlgInt operator+(const AlgInt& o) const { return {a + o.a, b + o.b}; }
    AlgInt operator-(const AlgInt& o) const { return {a - o.a, b - o.b}; }
    AlgInt operator-() const { return {-a, -b}; }
    bool is_zero() const { return a == 0 && b == 0; }

    std::string str() const; // "a + b*w", round-trips via parse_algint
};

AlgInt mul(const AlgInt& x, const AlgInt& y, const FieldCtx& ctx);
AlgInt conj(const AlgInt& x, const FieldCtx& ctx);
Int norm(const AlgInt& x, const FieldCtx& ctx);
AlgInt parse_algint(const std::string& s);

// Lexicographic on (a, b); used for canonical orderings only.
bool lex_less(const AlgInt& x, const AlgInt& y);

// x + y*w with rational x, y.
struct FieldElem {
    Rat x, y;

    FieldElem() : x(0), y(0) {}
    FieldElem(Rat x_, Rat y_) : x(std::move(x_)), y(std::move(y_)) {}
    FieldElem(const AlgInt& v) : x(v.a), y(v.b) {}
    FieldElem(long x_, long y_) : x(x_), y(y_) {}

    bool operator==(const FieldElem& o) const { return x == o.x && y == o.y; }
    bool operator!=(const FieldElem& o) const { return !(*this == o); }
    FieldElem operator+(const FieldElem& o) const { return {x + o.x, y + o.y}; }
    FieldElem operator-(const FieldElem& o) const { return {x - o.x, y - o.y}; }
    FieldElem operator-() const { return {-x, -y}; }
    bool is_zero() const { return x == 0 && y == 0; }

    std::string str() const;
};

FieldElem mul(const FieldElem& u, const FieldElem& v, const FieldCtx& ctx);
FieldElem conj(const FieldElem& u, const FieldCtx& ctx);
FieldElem div(const FieldElem& u, const FieldElem& v, const FieldCtx& ctx);
Rat norm(const FieldElem& u, const FieldCtx& ctx);
FieldElem parse_fieldelem(const std::string& s);

// Exact planar coordinates (x_re, y_im) with z = x_re + y_im * sqrt(-m).
struct Coords {
    Rat x, y;
    bool operator==(const Coords& o) const { return x == o.x && y == o.y; }
};
Coords coords(const FieldElem& u, const FieldCtx& ctx);

// Inverse of coords().
FieldElem from_coords(const Coords& c, const FieldCtx& ctx);

bool lex_less(const Coords& a, const Coords& b);

// True when the element lies in O (both basis coordinates integral).
bool is_integral(const FieldElem& u);
AlgInt to_algint(const FieldElem& u);

} // namespace bianchi
