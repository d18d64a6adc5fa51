#include "ace/extraction.hpp"

#include "ace/errors.hpp"
#include "ace/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace ace {

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

std::string lower_word_at(std::string_view s, std::size_t pos, std::size_t &end) {
  end = pos;
  while (end < s.size() && is_alpha(s[end])) ++end;
  return text::to_lower(s.substr(pos, end - pos));
}

// Words that make a preceding number a quantity rather than a price.
bool is_unit_word(const std::string &w) {
  static const char *units[] = {"mile",   "miles", "mi",     "km",      "kilometers", "year",
                                "years",  "yr",    "yrs",    "month",   "months",     "week",
                                "weeks",  "day",   "days",   "hour",    "hours",      "minute",
                                "minutes", "percent", "people", "owners", "owner",   "doors",
                                "mpg",    "times", "am",     "pm",      "bedroom",    "bedrooms",
                                "seats",  "cylinders", "th", "st", "nd", "rd"};
  return std::find(std::begin(units), std::end(units), w) != std::end(units);
}

bool is_number_word(const std::string &w) {
  static const char *words[] = {"thousand", "hundred", "grand"};
  return std::find(std::begin(words), std::end(words), w) != std::end(words);
}

// Curly apostrophes are folded so phrase lists only carry ASCII quotes.
std::string normalize_for_phrases(std::string_view s) {
  std::string out = text::to_lower(s);
  out = text::replace_all(std::move(out), "\xE2\x80\x99", "'");
  out = text::replace_all(std::move(out), "\xE2\x80\x98", "'");
  return out;
}

bool any_phrase(const std::string &lower, std::initializer_list<std::string_view> phrases) {
  for (auto p : phrases)
    if (text::contains_phrase(lower, p)) return true;
  return false;
}

bool has_refusal(const std::string &lower) {
  return any_phrase(lower, {"can't do", "cannot do", "can not do", "can't go", "cannot go",
                            "can't accept", "cannot accept", "can't afford", "too much", "too high",
                            "too expensive", "too steep", "too low", "beyond my", "out of my",
                            "not able to", "unable to", "don't think i am able", "don't think i'm able", "no way",
                            "won't work", "doesn't work", "does not work", "not going to work",
                            "i'll pass", "i will pass", "not interested", "no deal", "can't agree",
                            "don't think i can", "don't think i could", "not possible"});
}

bool has_strong_accept(const std::string &lower) {
  if (lower.rfind("deal", 0) == 0 && (lower.size() == 4 || !is_alpha(lower[4]))) return true;
  return any_phrase(lower, {"it's a deal", "it is a deal", "we have a deal", "we've got a deal",
                            "you've got a deal", "you got a deal", "you have a deal", "that's a deal",
                            "i accept", "accepted", "i'll take it", "i will take it", "sounds good",
                            "sounds great", "sounds fair", "sounds like a good", "sounds like a fair",
                            "works for me", "that works", "agreed", "let's do it", "let's do that",
                            "i agree", "sold", "i can accept", "happy with that", "deal!"});
}

bool has_weak_accept(const std::string &lower) {
  return any_phrase(lower, {"yes", "yeah", "yep", "ok", "okay", "sure", "all right", "alright",
                            "fine", "great"});
}

bool has_rephrase_marker(const std::string &lower) {
  return any_phrase(lower, {"you said", "did you say", "you mentioned", "you're saying",
                            "you are saying", "you just said", "so you're offering",
                            "so you are offering"});
}

std::optional<const Turn *> standing_turn(std::span<const Turn> conv, std::optional<Speaker> speaker) {
  for (auto it = conv.rbegin(); it != conv.rend(); ++it) {
    if (!is_priced(it->price_signal)) continue;
    if (speaker && it->speaker == *speaker) continue;
    return &*it;
  }
  return std::nullopt;
}

bool signal_mentions(const PriceSignal &sig, Money amount) {
  if (const auto *o = std::get_if<Offer>(&sig)) return o->amount == amount;
  if (const auto *r = std::get_if<Range>(&sig)) return r->lo == amount || r->hi == amount;
  return false;
}

bool is_range_connector(std::string_view between) {
  std::string t = text::to_lower(text::trim(between));
  t.erase(std::remove(t.begin(), t.end(), '$'), t.end());
  t = text::trim(t);
  return t == "to" || t == "and" || t == "or" || t == "-" || t == "\xE2\x80\x93" ||
         t == "\xE2\x80\x94" || t == "to maybe" || t == "or maybe" || t == "or so to";
}

} // namespace

std::vector<AmountMention> scan_amounts(std::string_view s, const ExtractionConfig &cfg) {
  std::vector<AmountMention> out;
  const char sep = cfg.locale_thousands_separator;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_digit(s[i]) || (i > 0 && (is_alpha(s[i - 1]) || is_digit(s[i - 1])))) {
      ++i;
      continue;
    }
    AmountMention m;
    m.begin = i;
    // "$ 12,000" / "$12,000"
    {
      std::size_t j = i;
      while (j > 0 && s[j - 1] == ' ') --j;
      if (j > 0 && s[j - 1] == '$') {
        m.has_dollar = true;
        m.begin = j - 1;
      }
    }
    std::string digits;
    std::size_t j = i;
    while (j < s.size() && is_digit(s[j])) digits.push_back(s[j++]);
    bool grouped = false;
    auto digit_at = [&](std::size_t p) { return p < s.size() && is_digit(s[p]); };
    while (j < s.size() && s[j] == sep && digit_at(j + 1) && digit_at(j + 2) && digit_at(j + 3) &&
           !digit_at(j + 4)) {
      digits.append(s.substr(j + 1, 3));
      j += 4;
      grouped = true;
    }
    double fraction = 0.0;
    bool has_fraction = false;
    if (j + 1 < s.size() && s[j] == '.' && is_digit(s[j + 1])) {
      std::size_t k = j + 1;
      std::string frac;
      while (k < s.size() && is_digit(s[k])) frac.push_back(s[k++]);
      fraction = std::stod("0." + frac);
      has_fraction = true;
      j = k;
    }
    // Skip over digits-only long runs that are phone numbers etc.
    if (digits.size() > 9) {
      i = j;
      continue;
    }
    const double base = std::stod(digits) + fraction;

    std::size_t k = j;
    while (k < s.size() && s[k] == ' ') ++k;
    std::size_t word_end = k;
    std::string word = (k < s.size() && is_alpha(s[k])) ? lower_word_at(s, k, word_end) : "";
    // A suffix glued to the number: "14k", "12.5k".
    std::string glued;
    std::size_t glued_end = j;
    if (j < s.size() && is_alpha(s[j])) glued = lower_word_at(s, j, glued_end);

    std::size_t end = j;
    if (glued == "k" || glued == "grand") {
      m.has_suffix = true;
      end = glued_end;
    } else if (glued.empty() && (word == "k" || word == "grand" || word == "thousand")) {
      m.has_suffix = true;
      end = word_end;
    }
    m.end = end;

    if (m.has_suffix) {
      m.value = static_cast<Money>(std::llround(base * 1000.0));
      m.is_price = m.value > 0;
    } else {
      m.value = static_cast<Money>(std::llround(base));
      const std::string &unit = glued.empty() ? word : glued;
      const bool unit_follows = is_unit_word(unit) ||
                                (k < s.size() && s[k] == '%') || (j < s.size() && s[j] == '%');
      const bool looks_like_year = !m.has_dollar && !grouped && !has_fraction && digits.size() == 4 &&
                                   m.value >= 1950 && m.value <= 2039;
      if (unit_follows || looks_like_year)
        m.is_price = false;
      else if (m.has_dollar)
        m.is_price = m.value > 0;
      else
        m.is_price = m.value >= 100;
    }
    out.push_back(m);
    i = std::max(end, j);
  }
  return out;
}

std::optional<PriceSignal> extract_rule_based(std::string_view utterance,
                                              std::span<const Turn> conversation_so_far,
                                              const ExtractionConfig &cfg,
                                              std::optional<Speaker> speaker) {
  if (text::trim(utterance).empty()) throw ValidationError("utterance must not be empty");

  auto mentions = scan_amounts(utterance, cfg);
  const std::string lower = normalize_for_phrases(utterance);

  // "10 to 11k": a bare leading number inherits the suffix of its partner.
  for (std::size_t i = 0; i + 1 < mentions.size(); ++i) {
    auto &a = mentions[i];
    const auto &b = mentions[i + 1];
    if (!a.is_price && !a.has_suffix && !a.has_dollar && b.has_suffix && a.value > 0 && a.value < 1000 &&
        is_range_connector(utterance.substr(a.end, b.begin - a.end))) {
      a.value *= 1000;
      a.has_suffix = true;
      a.is_price = true;
    }
  }

  std::vector<AmountMention> prices;
  for (const auto &m : mentions)
    if (m.is_price) prices.push_back(m);

  // Word-form amounts ("eleven thousand and five hundred") need the model.
  for (const auto &tok : text::split_ws(lower)) {
    const auto w = text::normalize_token(tok);
    if (is_number_word(w)) {
      bool consumed = false;
      for (const auto &m : mentions) {
        if (!m.has_suffix) continue;
        const auto seg = text::to_lower(utterance.substr(m.begin, m.end - m.begin));
        if (seg.find(w) != std::string::npos) consumed = true;
      }
      if (!consumed) return std::nullopt;
    }
  }

  const auto standing = standing_turn(conversation_so_far, speaker);
  const bool refusal = has_refusal(lower);
  const bool strong_accept = has_strong_accept(lower);
  const bool weak_accept = has_weak_accept(lower);

  if (prices.empty()) {
    if (refusal) return Refused{};
    if (strong_accept) return standing ? PriceSignal{Accepted{}} : PriceSignal{NoOffer{}};
    if (weak_accept && standing) return std::nullopt;
    return NoOffer{};
  }

  if (has_rephrase_marker(lower)) return Rephrasing{};

  // A lone echoed number with a question mark repeats the standing offer.
  if (prices.size() == 1 && standing) {
    const auto before = text::trim(utterance.substr(0, prices[0].begin));
    const auto after = text::trim(utterance.substr(prices[0].end));
    const bool only_number = before.empty() && !after.empty() &&
                             after.find_first_not_of("?!. ") == std::string::npos &&
                             after.find('?') != std::string::npos;
    if (only_number && signal_mentions((*standing)->price_signal, prices[0].value)) return Rephrasing{};
  }

  PriceSignal candidate = Offer{prices.back().value};
  if (prices.size() >= 2) {
    const auto &a = prices[prices.size() - 2];
    const auto &b = prices.back();
    if (is_range_connector(utterance.substr(a.end, b.begin - a.end))) {
      if (a.value != b.value)
        candidate = Range{std::min(a.value, b.value), std::max(a.value, b.value)};
    }
  }

  if (const auto *offer = std::get_if<Offer>(&candidate)) {
    if (refusal && standing && signal_mentions((*standing)->price_signal, offer->amount) &&
        prices.size() == 1)
      return Refused{};
    if (!refusal && (strong_accept || weak_accept)) {
      if (standing && signal_mentions((*standing)->price_signal, offer->amount)) return Accepted{};
      // "Yes 12000 sounds good" with nothing on the table: offer or acceptance?
      if (!standing && strong_accept) return std::nullopt;
    }
  }
  return candidate;
}

std::string price_extraction_prompt(std::string_view utterance) {
  static const std::string head =
      "#INSTRUCTION\n"
      "You have to extract priced offers from messages. Just give the dollar amount and nothing "
      "else. If no offer was proposed yet then say so. If an offer was accepted then say so. If the "
      "offer is presented as range of prices, then give both the prices. Do not ellicitate your "
      "reasoning.\n"
      "\n"
      "#EXAMPLES\n"
      "Message : \"I will be willing to pay something from 10k to 11k\"\n"
      "Offer:  \"10000 to 11000\".\n"
      "\n"
      "Message: \"so i am uh looking for this car and my current price range is between uh eleven "
      "thousand and five hundred to twelve thousand dollars\"\n"
      "Offer: \"11500 to 12000\"\n"
      "\n"
      "Message: \"Ooh, that's kind of rough. Our sticker price for this car is closer to $14,000.\"\n"
      "Offer: \"14000\"\n"
      "\n"
      "Message: \"Yes 12000 sounds like a good price for me.\"\n"
      "Offer: \"Accepted.\"\n"
      "\n"
      "Message: \"That's well beyond my price, I can't do that\"\n"
      "Offer: \"Refused.\"\n"
      "\n"
      "Message: \"Sure. No Problem\"\n"
      "Offer: \"No offer.\"\n"
      "\n"
      "Message: \"I don't think I am able to do that\"\n"
      "Offer: \"Refused.\"\n"
      "\n"
      "Message: \"12,500... I mean, could we call it even $13,000?\n"
      "Offer: \"13000\"\n"
      "\n"
      "Message: \"You said you would be willing to pay 12k ?\"\n"
      "Offer: \"Rephrasing.\"\n"
      "\n"
      "#EXTRACTION\n"
      "\n";
  std::string prompt = head;
  prompt += "Message: ";
  prompt += utterance;
  prompt += "\nOffer:";
  return prompt;
}

PriceSignal parse_extraction_reply(std::string_view reply) {
  std::string line = text::trim(first_line(std::string(reply)));
  std::string lower = text::to_lower(line);
  if (lower.rfind("offer", 0) == 0) {
    auto colon = lower.find(':');
    if (colon != std::string::npos) {
      line = text::trim(line.substr(colon + 1));
      lower = text::to_lower(line);
    }
  }
  if (lower.find("no offer") != std::string::npos) return NoOffer{};
  if (lower.find("accept") != std::string::npos) return Accepted{};
  if (lower.find("refus") != std::string::npos) return Refused{};
  if (lower.find("rephras") != std::string::npos) return Rephrasing{};

  ExtractionConfig cfg;
  std::vector<Money> amounts;
  for (const auto &m : scan_amounts(line, cfg))
    if (m.value > 0 && (m.is_price || m.has_suffix)) amounts.push_back(m.value);
  if (amounts.size() >= 2 && amounts[0] != amounts[1])
    return Range{std::min(amounts[0], amounts[1]), std::max(amounts[0], amounts[1])};
  if (!amounts.empty()) return Offer{amounts[0]};
  return NoOffer{};
}

PriceSignal extract_price_signal(std::string_view utterance, std::span<const Turn> conversation_so_far,
                                 ModelGateway &gateway, const ExtractionConfig &cfg,
                                 std::optional<Speaker> speaker) {
  if (auto sig = extract_rule_based(utterance, conversation_so_far, cfg, speaker)) return *sig;
  if (!cfg.use_gateway_fallback) return NoOffer{};
  auto req = ChatRequest::single(price_extraction_prompt(utterance), kClassifierTemperature, 32);
  return parse_extraction_reply(gateway.complete(req));
}

} // namespace ace
