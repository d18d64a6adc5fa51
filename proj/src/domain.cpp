#include "ace/domain.hpp"

#include "ace/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>

namespace ace {

std::string_view to_string(Role r) { return r == Role::Buyer ? "buyer" : "seller"; }

std::string_view to_string(Speaker s) { return s == Speaker::Learner ? "learner" : "agent"; }

Role role_from_string(std::string_view s) {
  if (s == "buyer") return Role::Buyer;
  if (s == "seller") return Role::Seller;
  throw ParseError("unknown role '" + std::string(s) + "'");
}

Speaker speaker_from_string(std::string_view s) {
  if (s == "learner") return Speaker::Learner;
  if (s == "agent") return Speaker::Agent;
  throw ParseError("unknown speaker '" + std::string(s) + "'");
}

void validate(const Scenario &s) {
  if (s.id.empty()) throw ValidationError("scenario id must not be empty");
  if (s.market_min >= s.market_max)
    throw ValidationError("scenario " + s.id + ": market_min must be below market_max");
  if (s.counterpart_reservation < s.market_min || s.counterpart_reservation > s.market_max)
    throw ValidationError("scenario " + s.id + ": counterpart_reservation outside market range");
  if (s.learner_role == Role::Buyer && s.unrealistic_floor >= s.market_min)
    throw ValidationError("scenario " + s.id + ": unrealistic_floor must be below market_min");
  if (s.learner_role == Role::Seller && s.unrealistic_floor <= s.market_max)
    throw ValidationError("scenario " + s.id + ": unrealistic ceiling must exceed market_max");
  if (s.budget && *s.budget <= 0)
    throw ValidationError("scenario " + s.id + ": budget must be positive");
}

void validate(const PreparationSheet &p) {
  if (p.walk_away <= 0) throw ValidationError("walk_away must be positive");
  if (p.target <= 0) throw ValidationError("target must be positive");
  if (p.planned_opening <= 0) throw ValidationError("planned_opening must be positive");
}

PriceSignal make_offer(Money amount) {
  PriceSignal s = Offer{amount};
  validate(s);
  return s;
}

PriceSignal make_range(Money lo, Money hi) {
  PriceSignal s = Range{lo, hi};
  validate(s);
  return s;
}

void validate(const PriceSignal &sig) {
  if (const auto *o = std::get_if<Offer>(&sig); o && o->amount <= 0)
    throw ValidationError("offer amount must be positive");
  if (const auto *r = std::get_if<Range>(&sig)) {
    if (r->lo <= 0) throw ValidationError("range bounds must be positive");
    if (r->lo >= r->hi) throw ValidationError("range lo must be below hi");
  }
}

bool is_priced(const PriceSignal &sig) {
  return std::holds_alternative<Offer>(sig) || std::holds_alternative<Range>(sig);
}

bool is_accepted(const PriceSignal &sig) { return std::holds_alternative<Accepted>(sig); }

std::optional<Money> representative_amount(const PriceSignal &sig, Role speaker_role) {
  if (const auto *o = std::get_if<Offer>(&sig)) return o->amount;
  if (const auto *r = std::get_if<Range>(&sig))
    return speaker_role == Role::Buyer ? r->hi : r->lo;
  return std::nullopt;
}

std::string_view kind_name(const PriceSignal &sig) {
  static constexpr std::string_view names[] = {"no_offer", "offer",   "range",
                                               "accepted", "refused", "rephrasing"};
  return names[sig.index()];
}

std::string describe(const PriceSignal &sig) {
  if (const auto *o = std::get_if<Offer>(&sig)) return "Offer(" + std::to_string(o->amount) + ")";
  if (const auto *r = std::get_if<Range>(&sig))
    return "Range(" + std::to_string(r->lo) + ", " + std::to_string(r->hi) + ")";
  return std::string(kind_name(sig));
}

Turn &Transcript::append(Speaker speaker, std::string text, PriceSignal sig, TimePoint ts) {
  Turn t;
  t.index = turns.size();
  t.speaker = speaker;
  t.text = std::move(text);
  t.price_signal = std::move(sig);
  t.timestamp = ts;
  turns.push_back(std::move(t));
  return turns.back();
}

void validate(const Transcript &t) {
  for (std::size_t i = 0; i < t.turns.size(); ++i) {
    if (t.turns[i].index != i)
      throw ValidationError("turn indices must be contiguous from 0 (turn " + std::to_string(i) +
                            " has index " + std::to_string(t.turns[i].index) + ")");
    validate(t.turns[i].price_signal);
  }
  if (t.duration_seconds < 0) throw ValidationError("duration_seconds must be nonnegative");
  if (t.deal && *t.deal <= 0) throw ValidationError("deal must be positive");
}

std::vector<LedgerEntry> offer_ledger(const Transcript &transcript, Speaker speaker,
                                      Role speaker_role) {
  std::vector<LedgerEntry> out;
  for (const auto &turn : transcript.turns) {
    if (turn.speaker != speaker) continue;
    if (auto amount = representative_amount(turn.price_signal, speaker_role))
      out.push_back({turn.index, *amount});
  }
  return out;
}

namespace {
struct CategoryNames {
  ErrorCategory category;
  std::string_view key;
  std::string_view display;
};

constexpr CategoryNames kCategoryNames[] = {
    {ErrorCategory::StrategicWalkAway, "strategic_walk_away", "Strategic walk-away"},
    {ErrorCategory::StrategicTarget, "strategic_target", "Strategic target price"},
    {ErrorCategory::BreakingIce, "breaking_ice", "Breaking the ice"},
    {ErrorCategory::GivingFirstOffer, "giving_first_offer", "Giving the first offer"},
    {ErrorCategory::AmbitiousOpening, "ambitious_opening", "Ambitious opening point"},
    {ErrorCategory::StrongCounteroffer, "strong_counteroffer", "Strong counteroffer"},
    {ErrorCategory::IncludingRationale, "including_rationale", "Including rationale"},
    {ErrorCategory::StrategicClosing, "strategic_closing", "Strategic closing"},
};
} // namespace

std::string_view to_string(ErrorCategory c) {
  return kCategoryNames[static_cast<std::size_t>(c)].key;
}

std::string_view display_name(ErrorCategory c) {
  return kCategoryNames[static_cast<std::size_t>(c)].display;
}

ErrorCategory category_from_string(std::string_view s) {
  for (const auto &n : kCategoryNames)
    if (n.key == s) return n.category;
  throw ParseError("unknown error category '" + std::string(s) + "'");
}

CategoryMetrics metrics_from_counts(ErrorCategory c, const ConfusionCounts &k) {
  CategoryMetrics m;
  m.category = c;
  m.counts = k;
  const auto n = k.total();
  m.accuracy = n > 0 ? static_cast<double>(k.tp + k.tn) / static_cast<double>(n) : 0.0;
  m.precision = (k.tp + k.fp) > 0 ? static_cast<double>(k.tp) / static_cast<double>(k.tp + k.fp) : 0.0;
  m.recall = (k.tp + k.fn) > 0 ? static_cast<double>(k.tp) / static_cast<double>(k.tp + k.fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

std::string format_money(Money m) { return "$" + std::to_string(m); }

std::string format_money_grouped(Money m) {
  std::string digits = std::to_string(m < 0 ? -m : m);
  std::string out;
  int count = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (count > 0 && count % 3 == 0) out.push_back(',');
    out.push_back(*it);
    ++count;
  }
  std::reverse(out.begin(), out.end());
  return (m < 0 ? "-$" : "$") + out;
}

std::string format_timestamp(TimePoint t) {
  using namespace std::chrono;
  const auto secs = floor<seconds>(t);
  const auto ms = (t - secs).count();
  const std::time_t tt = secs.time_since_epoch().count();
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

TimePoint parse_timestamp(std::string_view s) {
  int y, mo, d, h, mi, sec, ms = 0;
  char tail[8] = {0};
  const std::string str(s);
  int n = std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3d%7s", &y, &mo, &d, &h, &mi, &sec, &ms,
                      tail);
  if (n < 7) {
    ms = 0;
    n = std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%7s", &y, &mo, &d, &h, &mi, &sec, tail);
    if (n < 6) throw ParseError("bad timestamp '" + str + "'");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ParseError("bad timestamp date '" + str + "'");
  return TimePoint{sys_days{ymd}.time_since_epoch() + hours{h} + minutes{mi} + seconds{sec} +
                   milliseconds{ms}};
}

} // namespace ace
