#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace stagecraft {

// All codes (elements, facts, tuples, program values) are unbounded naturals.
// Pairing codes of derived elements nest quickly past 64 bits, so everything
// numeric goes through cpp_int.
using Nat = boost::multiprecision::cpp_int;

// Three valued answer used by budget bounded queries. `Unknown` means the
// budget ran out before evidence either way appeared; it is never an error.
enum class Trit { No, Yes, Unknown };

inline Trit trit_of(bool b) { return b ? Trit::Yes : Trit::No; }

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A fact code that does not decode, or that mentions an undeclared relation
// or the wrong number of arguments for its relation.
class MalformedFactError : public Error {
 public:
  using Error::Error;
};

// Caller handed an argument outside an operation's stated domain.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A bounded search was asked for more than its hard cap allows.
class SearchBudgetError : public Error {
 public:
  using Error::Error;
};

// An artifact claiming to be a functor or interpretation contradicted itself
// (for example, both signs of one atom were certified). Carries the witness.
class IllFormedError : public Error {
 public:
  IllFormedError(const std::string& what, Nat witness)
      : Error(what), witness_(std::move(witness)) {}
  const Nat& witness() const { return witness_; }

 private:
  Nat witness_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Work bounds threaded through every budget bounded operation.
//   steps:  instruction budget for one program run
//   axioms: axiom (or candidate) budget for one enumeration pass
struct RunLimits {
  std::uint64_t steps = 10000;
  std::uint64_t axioms = 10000;
};

// Answer of a semi-decision procedure: it can say yes, or run out of budget.
enum class SemiVerdict { Yes, Inconclusive };

// One checked property: pass, fail with a concrete witness code, or
// inconclusive (budget ran out before the check resolved).
struct Outcome {
  Trit ok = Trit::Unknown;
  bool has_witness = false;
  Nat witness = 0;
  std::string note;

  static Outcome pass() { return {Trit::Yes, false, 0, ""}; }
  static Outcome fail(Nat w, std::string note = "") {
    return {Trit::No, true, std::move(w), std::move(note)};
  }
  static Outcome undecided(std::string note = "") {
    return {Trit::Unknown, false, 0, std::move(note)};
  }
};

inline std::uint64_t to_u64(const Nat& n, const char* what = "value") {
  if (n < 0 || n > Nat(UINT64_MAX)) {
    throw InvalidInputError(std::string(what) + " out of machine range: " + n.str());
  }
  return n.convert_to<std::uint64_t>();
}

inline std::size_t to_size(const Nat& n, const char* what = "value") {
  std::uint64_t v = to_u64(n, what);
  return static_cast<std::size_t>(v);
}

}  // namespace stagecraft
