#include "stagecraft/report.hpp"

#include <algorithm>

#include <json.hpp>

namespace stagecraft {

void Report::add(std::string name, Outcome outcome) {
  checks_.push_back(CheckResult{std::move(name), std::move(outcome)});
  std::stable_sort(checks_.begin(), checks_.end(),
                   [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; });
}

void Report::merge(const Report& other) {
  for (const CheckResult& c : other.checks_) add(c.name, c.outcome);
}

std::uint64_t Report::passes() const {
  std::uint64_t n = 0;
  for (const auto& c : checks_) n += c.outcome.ok == Trit::Yes;
  return n;
}

std::uint64_t Report::failures() const {
  std::uint64_t n = 0;
  for (const auto& c : checks_) n += c.outcome.ok == Trit::No;
  return n;
}

std::uint64_t Report::inconclusive() const {
  std::uint64_t n = 0;
  for (const auto& c : checks_) n += c.outcome.ok == Trit::Unknown;
  return n;
}

std::string verdict_word(Trit t) {
  switch (t) {
    case Trit::Yes:
      return "pass";
    case Trit::No:
      return "fail";
    case Trit::Unknown:
      break;
  }
  return "inconclusive";
}

std::string Report::to_text() const {
  std::string out;
  for (const auto& c : checks_) {
    out += "CHECK " + c.name + " " + verdict_word(c.outcome.ok);
    if (c.outcome.has_witness) out += " witness=" + c.outcome.witness.str();
    out += "\n";
  }
  out += "SUMMARY pass=" + std::to_string(passes()) + " fail=" + std::to_string(failures()) +
         " inconclusive=" + std::to_string(inconclusive()) + "\n";
  return out;
}

std::string Report::to_structured() const {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : checks_) {
    nlohmann::json j;
    j["name"] = c.name;
    j["verdict"] = verdict_word(c.outcome.ok);
    if (c.outcome.has_witness) j["witness"] = c.outcome.witness.str();
    if (!c.outcome.note.empty()) j["note"] = c.outcome.note;
    checks.push_back(std::move(j));
  }
  nlohmann::json root;
  root["checks"] = std::move(checks);
  root["summary"] = {{"pass", passes()}, {"fail", failures()}, {"inconclusive", inconclusive()}};
  return root.dump(2) + "\n";
}

std::string Report::render(ReportFormat f) const {
  return f == ReportFormat::Text ? to_text() : to_structured();
}

}  // namespace stagecraft
