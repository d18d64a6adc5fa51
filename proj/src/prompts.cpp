#include "ace/prompts.hpp"

#include "ace/errors.hpp"
#include "ace/serialization.hpp"
#include "ace/text.hpp"

#include <algorithm>

namespace ace {

namespace {

constexpr const char *kWalkAwayPrompt =
    R"P(You are an assistant aimed to give advice to help a buyer in a negotiation. You are addressing directly to the buyer, use the second person (You).

The buyer made an error setting their walk-away price for the negotiation. The buyer set their walk-away price to ${value}. However a good walk-away price is {expected}.

Give the buyer feedback explaining their error including details about what would be a good walk-away price.)P";

constexpr const char *kTargetLowPrompt =
    R"P(You are an assistant aimed to give advice to help a buyer in a negotiation. You are addressing directly to the buyer, use the second person (You).

The buyer made an error setting their target price for the negotiation. The buyer set their target price to ${value}. However a good target price should be above the minimum market value for the car which is ${market_min}.

Give the buyer feedback explaining their error including details about what would be a good target price.
Here is an example of good feedback:
This overly ambitious target is below the market range for the car.  It may cause offense. By overreaching, you may miss out on good deal.)P";

constexpr const char *kTargetHighPrompt =
    R"P(You are an assistant aimed to give advice to help a buyer in a negotiation. You are addressing directly to the buyer, use the second person (You).

The buyer made an error setting their target price for the negotiation. The buyer set their target price to ${value}. However a good target price should be below ${bound} and closer to the minimum market range for the car which is ${market_min}.

Give the buyer feedback explaining their error including details about what would be a good target price.
Here is an example of good feedback:
Your target price of {value} is not ambitious enough to test how far this seller can be pushed. You should aspire to a price at the low end of the market range.)P";

constexpr const char *kPlannedOpeningPrompt =
    R"P(You are an assistant aimed to give advice to help a buyer in a negotiation. You are addressing directly to the buyer, use the second person (You).

The buyer planned an opening offer of ${value} with a target price of ${target}. A strong opening offer would be at or below ${threshold}, so that the target sits near the middle of the range under discussion.

Give the buyer feedback explaining why their planned opening is too close to their target and what a stronger opening would be.)P";

constexpr const char *kDirectBreakingIce =
    R"P(#INSTRUCTION
We are here in the context of a negotiation. You are an assistant aimed help a buyer in a negotiation and give them comments on their messages. In this passage: {passage}

The buyer went straight to business in their first message without any social conversation.

Give the buyer a quick explanation of why a few words of rapport at the start of a negotiation help, and suggest what they could have said. Address the buyer directly, use the second person (You).)P";

constexpr const char *kDirectFirstOffer =
    R"P(#INSTRUCTION
We are here in the context of a negotiation. You are an assistant aimed help a buyer in a negotiation and give them comments on their offers. Here is the conversation :
{conversation}

The seller stated a price before the buyer did. The seller's first price was ${seller_offer}.

Give the buyer a quick explanation of why stating the first price anchors the negotiation in their favour. Address the buyer directly, use the second person (You).)P";

constexpr const char *kDirectAmbitiousOpening =
    R"P(You are an assistant aimed to reedit text to help a buyer in a negotiation and provide them feedback on their offer.
Here is the conversation :
{conversation}

Give them an explanation.

Example of good explanation:

"Considering the seller's offer of ${seller_offer} and your target price of ${target}, a strong first offer would ideally be below ${threshold}. This approach helps to keep your target price near the midpoint of the range under discussion.")P";

constexpr const char *kDirectOpeningNoOffer =
    R"P(You are an assistant aimed to reedit text to help a buyer in a negotiation and provide them feedback on their offer.
Here is the conversation :
{conversation}

Give them an explanation.

Example of good explanation:

"Considering your target price of ${target}, a strong first offer would ideally be at or below ${threshold}. This approach helps to keep your target price near the midpoint of the range under discussion.")P";

constexpr const char *kDirectStrongCounteroffer =
    R"P(You are an assistant aimed to reedit text to help a buyer in a negotiation and provide them feedback on their offer.
Here is the conversation :
{conversation}

The buyer's counteroffer conceded more than half of the remaining gap. Give them an explanation.

Example of good explanation:

"Considering your previous offer of ${previous_offer} and the seller's offer of ${seller_offer}, a strong counteroffer would ideally be below ${threshold}. Conceding in small steps keeps your target price within reach.")P";

constexpr const char *kDirectRationale =
    "#INSTRUCTION\n"
    "We are here in the context of a negotiation. You are an assistant aimed help a buyer in a negotiation "
    "and give them comments on their offers. In this passage: {passage}\n"
    "\n"
    "The buyer did not give enough arguments to justify their offer.\n"
    "\n"
    "Give the buyer a quick explanation. Try to quote some words the buyer said.\n"
    "\n"
    "EXAMPLE OF EXPLANATION:\n"
    "\"When you present a revised offer, it\xE2\x80\x99s persuasive to give some explanation for the move. "
    "Why are you offering more? Why are you resisting offering everything they ask for? The explanations "
    "you provide may be subjective, such as your eagerness to reach a deal or your pressing budget "
    "constraints, but some words of explanation like this help the seller understand and accept your "
    "perspective. \"";

constexpr const char *kDirectClosing =
    R"P(#INSTRUCTION
We are here in the context of a negotiation that just ended with a deal. You are an assistant aimed help a buyer in a negotiation and give them comments on how they closed the deal. Here are the buyer's final messages:
{passage}

The buyer did not close strategically: a good closing credits the seller's negotiation skill or recounts the buyer's own concessions, and never celebrates the outcome or suggests the buyer got the better deal.

Give the buyer a quick explanation. Try to quote some words the buyer said. Address the buyer directly, use the second person (You).)P";

constexpr const char *kSummarizePrompt =
    R"P(Different teachers gave comments to a buyer about one message they sent in a negotiation:
{comments}

Merge these comments into one short paragraph addressed to the buyer, use the second person (You). Keep every distinct piece of advice and any prices mentioned.)P";

constexpr const char *kRevisePrompt =
    "We are in the context of a negotiation.\n"
    "Different teachers gave comments to the buyer:\n"
    "Your task is to propose an alternative message the buyer could have sent that would match all the "
    "comments given by teachers.\n"
    "\n"
    "For example if a comment is saying that the buyer should open the conversation with an ice breaker, "
    "then propose an icebreaker.\n"
    "If a comment is saying that they should add rationales to their offers, then rewrite the offer and "
    "add a few rationales to it.\n"
    "You have to put yourself in the buyer's position. Assume that you are talking to the seller.\n"
    "\n"
    "#EXAMPLE1 :\n"
    "- MESSAGE:\n"
    "\"Seems a little steep, steep for me. You know, I can do something in the, you know, $12,000 range "
    "would really be, you know, near the top of the end of my budget. Do you have any flexibility there? "
    "You know, anything we can do to, you know, work on that price?\"\n"
    "\n"
    "-COMMENTS:\n"
    "\"comment 1: \"Negotiation research finds a benefit to speaking your opening offer first. It can "
    "\xE2\x80\x9C" "anchor\xE2\x80\x9D the other person\xE2\x80\x99s judgment of the price range, setting "
    "the stage for a more favorable outcome.\"\n"
    "comment 2: \"Considering your target price of $10000, a strong first offer would ideally be below "
    "$9000. This approach helps to keep your target price near the midpoint of the range under "
    "discussion.\"\n"
    "\n"
    "- ANSWER: \"The price seems a little steep for me. I can work with something in the $9,000 range, "
    "which is near the top end of my budget. I want to ensure that we can reach a mutually beneficial "
    "agreement. Is there any flexibility on the price from your end?\"\n"
    "\n"
    "#EXAMPLE2:\n"
    "-MESSAGE:\n"
    "\"Hi, I'm looking for probably a Honda Accord with reasonable mileage around maybe $15000. Do you "
    "have anything like that?\"\n"
    "\n"
    "-COMMENTS:\n"
    "\"comment 1: \"Begin your negotiation conversation with some brief social conversation before "
    "delving into the economic issues. Show esteem for the other person (your counterpart) by praising "
    "what they are selling or asking about their day. \xE2\x80\x9C" "Breaking the ice\xE2\x80\x9D in some "
    "way through initial personal conversation creates rapport, which tends to increase openness and "
    "cooperativeness.\n"
    "comment 2: \"Negotiation research finds that opening offers are most effective when accompanied by "
    "a rationale in terms of some objective reference point, such as an expert\xE2\x80\x99s valuation of "
    "the object under negotiation or market value indicated by past sales prices.\"\n"
    "-ANSWER: \"Hey ! It has been a long time are you doing ?\"\n"
    "\n"
    "#YOUR TURN TO DO IT NOW\n"
    "-MESSAGE:\n"
    "{message}\n"
    "- COMMENTS:\n"
    "{comments}\n"
    "- ANSWER:";

constexpr const char *kHolisticPrompt =
    "Given the negotiation transcript: {transcript}\n"
    "\n"
    "Your goal is to to build a constructive feedback to a user in order to them reaching a better "
    "outcome if they had to go over this\n"
    "negotiation again. You will focus on the linguistics aspect and strategic aspects and dont bother "
    "with discussing the prices offered.\n"
    "You are adressing directly to the buyer, use the second person (You).\n"
    "Here are the dimensions your feedback will include:\n"
    "\n"
    "- Formality: A buyer cannot be rude and pushy. Also a good buyer stays polite.\n"
    "- Firmness: A buyer cannot be too emotional. Studied have shown that firm and tough levels of "
    "communication help reaching better economic outcome than warmth and too friendly.\n"
    "- Linguistic level: A buyer should not be apologizing. Buyer do not say the word "
    "\xE2\x80\x9Cgreedy\xE2\x80\x9D (can be interpreted as a personal attack).\n"
    "As a buyer you should project that you do not need to buy a car/you have a perfectly good "
    "alternative. The buyer also should somehow mention that they have a plan B.\n"
    "\n"
    "Feedback:";

constexpr const char *kOtherFeedbackPrompt =
    R"P(Here is a transcript of a negotiation between a buyer and a seller:
{transcript}

Give exactly three suggestions on how the buyer can improve in their next negotiation. Number them 1., 2. and 3., one per line, and address the buyer directly.)P";

// Words are swapped through a sentinel so buyer->seller->buyer never chains.
const std::pair<std::string_view, std::string_view> kRoleWords[] = {
    {"buyer", "seller"}, {"Buyer", "Seller"}, {"BUYER", "SELLER"},
    {"buy", "sell"},     {"Buy", "Sell"},
};

} // namespace

std::string direct_prompt_key(ErrorCategory c) { return "direct_" + std::string(to_string(c)); }

std::string swap_roles(std::string_view input) {
  std::string s(input);
  int i = 0;
  for (const auto &[a, b] : kRoleWords) {
    s = text::replace_all(std::move(s), a, "\x01" + std::to_string(i) + "A\x02");
    s = text::replace_all(std::move(s), b, "\x01" + std::to_string(i) + "B\x02");
    ++i;
  }
  i = 0;
  for (const auto &[a, b] : kRoleWords) {
    s = text::replace_all(std::move(s), "\x01" + std::to_string(i) + "A\x02", b);
    s = text::replace_all(std::move(s), "\x01" + std::to_string(i) + "B\x02", a);
    ++i;
  }
  return s;
}

PromptLibrary::PromptLibrary() {
  const std::pair<std::string, const char *> builtins[] = {
      {prompt_keys::kWalkAway, kWalkAwayPrompt},
      {prompt_keys::kTargetLow, kTargetLowPrompt},
      {prompt_keys::kTargetHigh, kTargetHighPrompt},
      {prompt_keys::kPlannedOpening, kPlannedOpeningPrompt},
      {direct_prompt_key(ErrorCategory::BreakingIce), kDirectBreakingIce},
      {direct_prompt_key(ErrorCategory::GivingFirstOffer), kDirectFirstOffer},
      {direct_prompt_key(ErrorCategory::AmbitiousOpening), kDirectAmbitiousOpening},
      {prompt_keys::kOpeningNoOffer, kDirectOpeningNoOffer},
      {direct_prompt_key(ErrorCategory::StrongCounteroffer), kDirectStrongCounteroffer},
      {direct_prompt_key(ErrorCategory::IncludingRationale), kDirectRationale},
      {direct_prompt_key(ErrorCategory::StrategicClosing), kDirectClosing},
      {prompt_keys::kSummarize, kSummarizePrompt},
      {prompt_keys::kRevise, kRevisePrompt},
      {prompt_keys::kHolistic, kHolisticPrompt},
      {prompt_keys::kOtherFeedback, kOtherFeedbackPrompt},
  };
  for (const auto &[key, body] : builtins) {
    templates_[{key, Role::Buyer}] = body;
    templates_[{key, Role::Seller}] = swap_roles(body);
  }
}

PromptLibrary PromptLibrary::with_overrides(const std::filesystem::path &dir) {
  PromptLibrary lib;
  if (!std::filesystem::is_directory(dir))
    throw NotFound("prompt override directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto &e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  // role-agnostic files first so role-specific ones win
  std::stable_partition(files.begin(), files.end(),
                        [](const auto &p) { return p.stem().extension().empty(); });
  for (const auto &p : files) {
    auto body = read_text_file(p);
    const auto stem = p.stem();
    const auto role_ext = stem.extension().string();
    if (role_ext.empty()) {
      lib.set(stem.string(), Role::Buyer, body);
      lib.set(stem.string(), Role::Seller, swap_roles(body));
    } else {
      lib.set(stem.stem().string(), role_from_string(role_ext.substr(1)), body);
    }
  }
  return lib;
}

const std::string &PromptLibrary::get(const std::string &key, Role role) const {
  const auto it = templates_.find({key, role});
  if (it == templates_.end()) throw NotFound("no prompt template named '" + key + "'");
  return it->second;
}

void PromptLibrary::set(const std::string &key, Role role, std::string text) {
  templates_[{key, role}] = std::move(text);
}

std::vector<std::string> PromptLibrary::keys() const {
  std::vector<std::string> out;
  for (const auto &[k, v] : templates_)
    if (k.second == Role::Buyer) out.push_back(k.first);
  return out;
}

std::string fill(std::string tpl, const PromptVars &vars) {
  // single pass, so values are never rescanned for placeholders
  std::string out;
  std::size_t pos = 0;
  while (pos < tpl.size()) {
    const auto open = tpl.find('{', pos);
    if (open == std::string::npos) break;
    const auto close = tpl.find('}', open + 1);
    if (close == std::string::npos) break;
    const auto name = std::string_view(tpl).substr(open + 1, close - open - 1);
    const auto it = std::find_if(vars.begin(), vars.end(), [&](const auto &v) { return v.first == name; });
    out.append(tpl, pos, open - pos);
    if (it == vars.end()) {
      out += '{';
      pos = open + 1;
      continue;
    }
    out += it->second;
    pos = close + 1;
  }
  out.append(tpl, pos);
  return out;
}

} // namespace ace
