#pragma once

// Winding descriptors: words over {L, R, L^-1, R^-1} recording how a contour
// circles the branch points x = -1 (L) and x = +1 (R). Inverse letters are
// written Q = L^-1 and P = R^-1.

#include <algorithm>
#include <cmath>
#include <compare>
#include <complex>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "toboggan/contour.hpp"
#include "toboggan/errors.hpp"

namespace toboggan {

enum class Branch { Left, Right };
enum class Orientation { CounterClockwise, Clockwise };

struct Letter {
  Branch base = Branch::Left;
  Orientation orientation = Orientation::CounterClockwise;

  static constexpr Letter L() { return {Branch::Left, Orientation::CounterClockwise}; }
  static constexpr Letter Q() { return {Branch::Left, Orientation::Clockwise}; }
  static constexpr Letter R() { return {Branch::Right, Orientation::CounterClockwise}; }
  static constexpr Letter P() { return {Branch::Right, Orientation::Clockwise}; }

  constexpr Letter inverse() const {
    return {base, orientation == Orientation::Clockwise ? Orientation::CounterClockwise : Orientation::Clockwise};
  }
  constexpr Letter mirrored() const { return {base == Branch::Left ? Branch::Right : Branch::Left, orientation}; }

  constexpr char symbol() const {
    if (base == Branch::Left) return orientation == Orientation::CounterClockwise ? 'L' : 'Q';
    return orientation == Orientation::CounterClockwise ? 'R' : 'P';
  }

  // Ordering L < Q < R < P used for deterministic enumeration.
  constexpr int rank() const {
    return (base == Branch::Left ? 0 : 2) + (orientation == Orientation::CounterClockwise ? 0 : 1);
  }

  constexpr int signed_turn() const { return orientation == Orientation::CounterClockwise ? 1 : -1; }

  friend constexpr bool operator==(Letter, Letter) = default;
};

inline Letter letter_from_symbol(char c) {
  switch (c) {
    case 'L': return Letter::L();
    case 'Q': return Letter::Q();
    case 'R': return Letter::R();
    case 'P': return Letter::P();
    default: throw Error(ErrorKind::InvalidArgument, std::string("unknown winding letter '") + c + "'");
  }
}

class Word {
 public:
  Word() = default;
  explicit Word(std::vector<Letter> letters) : letters_(std::move(letters)) {}

  /// Parses "LRQP" style text; "0" and "" give the empty word.
  static Word parse(std::string_view text) {
    std::vector<Letter> letters;
    if (text == "0") return Word{};
    for (char c : text) letters.push_back(letter_from_symbol(c));
    return Word(std::move(letters));
  }

  const std::vector<Letter>& letters() const noexcept { return letters_; }
  std::size_t size() const noexcept { return letters_.size(); }
  bool empty() const noexcept { return letters_.empty(); }
  const Letter& operator[](std::size_t i) const { return letters_[i]; }
  void push_back(Letter l) { letters_.push_back(l); }

  std::string to_string() const {
    std::string out;
    out.reserve(letters_.size());
    for (auto l : letters_) out.push_back(l.symbol());
    return out;
  }

  bool is_reduced() const {
    for (std::size_t i = 1; i < letters_.size(); ++i) {
      if (letters_[i] == letters_[i - 1].inverse()) return false;
    }
    return true;
  }

  /// Net signed turn count around one branch point.
  int net_winding(Branch base) const {
    int n = 0;
    for (auto l : letters_) {
      if (l.base == base) n += l.signed_turn();
    }
    return n;
  }

  friend bool operator==(const Word&, const Word&) = default;
  friend bool operator<(const Word& a, const Word& b) {
    return std::lexicographical_compare(a.letters_.begin(), a.letters_.end(), b.letters_.begin(), b.letters_.end(),
                                        [](Letter x, Letter y) { return x.rank() < y.rank(); });
  }

 private:
  std::vector<Letter> letters_;
};

/// Free reduction: cancels adjacent X X^-1 pairs until none remain.
inline Word reduce(const Word& w) {
  std::vector<Letter> stack;
  stack.reserve(w.size());
  for (auto l : w.letters()) {
    if (!stack.empty() && stack.back() == l.inverse()) stack.pop_back();
    else stack.push_back(l);
  }
  return Word(std::move(stack));
}

/// Reverse reading with L <-> R interchange; orientation is kept.
inline Word transpose(const Word& w) {
  std::vector<Letter> out;
  out.reserve(w.size());
  for (auto it = w.letters().rbegin(); it != w.letters().rend(); ++it) out.push_back(it->mirrored());
  return Word(std::move(out));
}

inline Word concat(const Word& a, const Word& b) {
  std::vector<Letter> out = a.letters();
  out.insert(out.end(), b.letters().begin(), b.letters().end());
  return Word(std::move(out));
}

/// A reduced, PT-symmetric word rho = Omega Omega^T of length 2N.
class Descriptor {
 public:
  Descriptor() = default;

  /// Validates a word as a descriptor: reduced, even length, transpose-invariant.
  static Descriptor from_word(const Word& w) {
    if (!w.is_reduced()) throw Error(ErrorKind::InvalidArgument, "descriptor word must be reduced");
    if (w.size() % 2 != 0 || transpose(w) != w) {
      throw Error(ErrorKind::NotPTSymmetric, "word " + w.to_string() + " is not of the form Omega Omega^T");
    }
    return Descriptor(w);
  }

  const Word& word() const noexcept { return word_; }
  std::size_t N() const noexcept { return word_.size() / 2; }
  Word omega() const {
    return Word(std::vector<Letter>(word_.letters().begin(), word_.letters().begin() + static_cast<long>(N())));
  }
  bool empty() const noexcept { return word_.empty(); }

  /// "0" for the empty descriptor, otherwise the L/R/Q/P string.
  std::string to_string() const { return word_.empty() ? std::string("0") : word_.to_string(); }

  friend bool operator==(const Descriptor&, const Descriptor&) = default;

 private:
  explicit Descriptor(Word w) : word_(std::move(w)) {}
  Word word_;
};

inline Descriptor pt_symmetrize(const Word& omega) {
  if (!omega.is_reduced()) throw Error(ErrorKind::InvalidArgument, "Omega must be reduced");
  Word rho = reduce(concat(omega, transpose(omega)));
  if (rho.size() < 2 * omega.size()) {
    throw Error(ErrorKind::NonReducible, "Omega " + omega.to_string() + " cancels against its transpose");
  }
  return Descriptor::from_word(rho);
}

/// All reduced words of length n, ordered L < Q < R < P lexicographically.
inline std::vector<Word> reduced_words(std::size_t n) {
  std::vector<Word> out{Word{}};
  const Letter alphabet[] = {Letter::L(), Letter::Q(), Letter::R(), Letter::P()};
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Word> next;
    for (const auto& w : out) {
      for (auto l : alphabet) {
        if (!w.empty() && w.letters().back() == l.inverse()) continue;
        Word e = w;
        e.push_back(l);
        next.push_back(std::move(e));
      }
    }
    out = std::move(next);
  }
  return out;
}

inline constexpr std::size_t kDefaultDescriptorBound = 6;

/// PT-symmetric descriptors of length 2N, one per admissible Omega.
inline std::vector<Descriptor> enumerate_descriptors(std::size_t N, std::size_t bound = kDefaultDescriptorBound) {
  if (N > bound) {
    throw Error(ErrorKind::InvalidArgument,
                "N = " + std::to_string(N) + " exceeds descriptor bound " + std::to_string(bound));
  }
  std::vector<Descriptor> out;
  for (const auto& omega : reduced_words(N)) {
    try {
      out.push_back(pt_symmetrize(omega));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonReducible) throw;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification of traced contours.
//
// Upward detection rays start at the branch points. A crossing of the ray from
// -1 emits L (leftward, i.e. counterclockwise) or Q (rightward); the ray from
// +1 emits R or P. Contours are read from their Re x -> -inf tail to their
// Re x -> +inf tail: when the anchored branch runs the other way, the
// opposite global root -x(s) is read instead.

struct ClassifyOptions {
  double graze_tolerance = 1e-12;  // relative to 1 + |x|
  double retry_tilt = 1e-6;        // radians
  double tail_clearance = 2.0;     // required |Re x| at both ends
};

namespace detail {

struct Ray {
  ComplexValue origin;
  ComplexValue direction;  // unit vector
};

// Signed distance of p from the line through the ray; > 0 on the left side
// of the upward direction (i.e. toward -Re for an untilted ray).
inline double side_of(const Ray& r, ComplexValue p) {
  const ComplexValue d = p - r.origin;
  return r.direction.real() * d.imag() - r.direction.imag() * d.real();
}

inline double along(const Ray& r, ComplexValue p) {
  const ComplexValue d = p - r.origin;
  return r.direction.real() * d.real() + r.direction.imag() * d.imag();
}

// Returns false on grazing.
inline bool crossing_word_with_tilt(const std::vector<ComplexValue>& path, double tilt, double tol, Word& out) {
  const ComplexValue up = std::polar(1.0, 0.5 * std::numbers::pi + tilt);
  const Ray rays[2] = {{ComplexValue(-1.0, 0.0), up}, {ComplexValue(1.0, 0.0), up}};
  const Branch bases[2] = {Branch::Left, Branch::Right};
  out = Word{};
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const ComplexValue a = path[i];
    const ComplexValue b = path[i + 1];
    for (int k = 0; k < 2; ++k) {
      const double da = side_of(rays[k], a);
      const double db = side_of(rays[k], b);
      const double tol_a = tol * (1.0 + std::abs(a));
      if (std::abs(da) <= tol_a && along(rays[k], a) >= 0.0) return false;
      if ((da < 0.0) == (db < 0.0)) continue;
      const double t = da / (da - db);
      const ComplexValue hit = a + t * (b - a);
      if (along(rays[k], hit) <= 0.0) continue;
      // da < 0 means a lies right of the ray: moving leftward is counterclockwise.
      const Orientation o = da < 0.0 ? Orientation::CounterClockwise : Orientation::Clockwise;
      out.push_back(Letter{bases[k], o});
    }
  }
  if (!path.empty()) {
    const ComplexValue last = path.back();
    for (const auto& r : rays) {
      if (std::abs(side_of(r, last)) <= tol * (1.0 + std::abs(last)) && along(r, last) >= 0.0) return false;
    }
  }
  return true;
}

inline std::vector<ComplexValue> oriented_path(const Contour& c, const ClassifyOptions& opt) {
  const ComplexValue first = c.front().x;
  const ComplexValue last = c.back().x;
  if (!(std::abs(first.real()) > opt.tail_clearance && std::abs(last.real()) > opt.tail_clearance)) {
    throw Error(ErrorKind::InvalidArgument, "contour ends must satisfy |Re x| > " +
                                                std::to_string(opt.tail_clearance) +
                                                "; extend the traced s-range");
  }
  const double sign = first.real() < 0.0 ? 1.0 : -1.0;
  std::vector<ComplexValue> path;
  path.reserve(c.size());
  for (const auto& p : c.samples()) path.push_back(sign * p.x);
  return path;
}

}  // namespace detail

/// Raw, unreduced sequence of signed ray crossings in traversal order.
inline Word crossing_word(const Contour& c, const ClassifyOptions& opt = {}) {
  const auto path = detail::oriented_path(c, opt);
  Word w;
  if (detail::crossing_word_with_tilt(path, 0.0, opt.graze_tolerance, w)) return w;
  if (detail::crossing_word_with_tilt(path, opt.retry_tilt, opt.graze_tolerance, w)) return w;
  throw Error(ErrorKind::RayGrazing, "contour grazes a detection ray even after tilting");
}

inline Descriptor classify_contour(const Contour& c, const ClassifyOptions& opt = {}) {
  const Word reduced = reduce(crossing_word(c, opt));
  return Descriptor::from_word(reduced);
}

}  // namespace toboggan
