#pragma once

// Independent re-statements of the price formulas in exact rational
// arithmetic, written from the category definitions rather than from the
// cross-multiplied forms in the library.

#include "support.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include <cmath>

namespace acetest {

using Q = boost::rational<std::int64_t>;

inline Money floor_q(Q q) {
  Money n = q.numerator(), d = q.denominator();
  return n >= 0 ? n / d : -((-n + d - 1) / d);
}

inline Money round_half_up(Q q) { return floor_q(q + Q(1, 2)); }

inline bool oracle_walk_away(Money w, std::optional<Money> budget, Money mmin, Money mmax, Role role) {
  if (budget) return w == *budget;
  return role == Role::Buyer ? w < mmax : w > mmin;
}

/// Target within the first third of [min, W] (buyer) or the last third of
/// [W, max] (seller), measured exactly.
inline bool oracle_target(Money t, Money w, Money mmin, Money mmax, Role role) {
  if (role == Role::Buyer) return Q(t) >= Q(mmin) && Q(t) <= Q(mmin) + Q(w - mmin, 3);
  return Q(t) <= Q(mmax) && Q(t) >= Q(mmax) - Q(mmax - w, 3);
}

inline MoneyRange oracle_target_range(Money w, Money mmin, Money mmax, Role role) {
  if (role == Role::Buyer) return {mmin, mmin + round_half_up(Q(w - mmin, 3))};
  return {mmax - round_half_up(Q(mmax - w, 3)), mmax};
}

/// Buyer: opening at most 90% of target, or, once the counterpart has
/// named a price, the midpoint of the two at most the target.
inline bool oracle_opening(Money o1, std::optional<Money> s, Money t, Role role) {
  if (role == Role::Buyer) return s ? Q(*s + o1, 2) <= Q(t) : Q(o1) <= Q(9, 10) * Q(t);
  return s ? Q(*s + o1, 2) >= Q(t) : Q(o1) >= Q(11, 10) * Q(t);
}

/// Buyer: the new offer stays strictly below the midpoint between the
/// previous offer and the better of the counterpart's offer and the walk-away.
inline bool oracle_counter(Money o_t, Money o_prev, Money s, Money w, Role role) {
  if (role == Role::Buyer) return Q(o_t) < Q(o_prev + std::min(s, w), 2);
  return Q(o_t) > Q(o_prev + std::max(s, w), 2);
}

} // namespace acetest

namespace acetest {

/// Brute-force confusion counts for one category: every gold label is looked
/// up in the prediction by linear search.
struct OracleMetrics {
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  std::size_t items = 0;
};

inline OracleMetrics oracle_metrics(const std::vector<AnnotatedTranscript> &pred,
                                    const std::vector<AnnotatedTranscript> &gold, ErrorCategory cat) {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t d = 0; d < gold.size(); ++d)
    for (const auto &g : gold[d].annotations) {
      if (!g.applicable || g.category != cat) continue;
      for (const auto &p : pred[d].annotations) {
        if (!p.applicable || p.category != cat || p.turn_index != g.turn_index) continue;
        const bool pm = !p.verdict, gm = !g.verdict;
        tp += pm && gm;
        fp += pm && !gm;
        fn += !pm && gm;
        tn += !pm && !gm;
      }
    }
  OracleMetrics m;
  m.items = static_cast<std::size_t>(tp + fp + fn + tn);
  if (!m.items) return m;
  m.accuracy = double(tp + tn) / double(m.items);
  m.precision = tp + fp ? double(tp) / double(tp + fp) : 0.0;
  m.recall = tp + fn ? double(tp) / double(tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

/// Welch statistic with means and variances in exact (unbounded) rationals.
inline std::pair<double, double> oracle_welch(const std::vector<Money> &a, const std::vector<Money> &b) {
  using R = boost::multiprecision::cpp_rational;
  auto mv = [](const std::vector<Money> &x) {
    R m(0);
    for (Money v : x) m += R(v);
    m /= R(x.size());
    R ss(0);
    for (Money v : x) ss += (R(v) - m) * (R(v) - m);
    return std::pair{m, ss / R(x.size() - 1)};
  };
  const auto [ma, va] = mv(a);
  const auto [mb, vb] = mv(b);
  const R qa = va / R(a.size()), qb = vb / R(b.size());
  const R df = (qa + qb) * (qa + qb) / (qa * qa / R(a.size() - 1) + qb * qb / R(b.size() - 1));
  const double t = static_cast<double>(ma - mb) / std::sqrt(static_cast<double>(qa + qb));
  return {t, static_cast<double>(df)};
}

/// Alternating scripted buyer (b0 + k*sb) and seller (s0 - k*ss), limits not
/// binding. The seller accepts in round k when b_k >= s_k; the buyer accepts
/// the previous ask in round k when b_k >= s_{k-1}. Whichever comes first.
struct ClosedFormDeal {
  Money price = 0;
  int turns = 0;
};

inline Money ceil_div(Money a, Money b) { return a <= 0 ? 0 : (a + b - 1) / b; }

inline ClosedFormDeal oracle_scripted_deal(Money b0, Money sb, Money s0, Money ss) {
  const Money seller_round = ceil_div(s0 - b0, sb + ss);
  const Money buyer_round = std::max<Money>(1, ceil_div(s0 - b0 + ss, sb + ss));
  if (buyer_round <= seller_round)
    return {s0 - (buyer_round - 1) * ss, static_cast<int>(2 * buyer_round + 1)};
  return {b0 + seller_round * sb, static_cast<int>(2 * seller_round + 2)};
}

} // namespace acetest
