#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace charlotte::calculus {

// Finite model of observers, beliefs and views. Blocks are small integers;
// sets are bitmasks, so everything here is exhaustively checkable.

using BlockSet = uint32_t;
constexpr int kMaxBlocks = 20;

inline bool subset(BlockSet a, BlockSet b) { return (a & ~b) == 0; }
inline BlockSet bit(int i) { return BlockSet{1} << i; }

// One possible world: which blocks can exist, in what observation order,
// and which stay available. observe_before is kept transitively closed.
struct Universe {
  BlockSet exist = 0;
  BlockSet avail = 0;
  std::vector<BlockSet> before;  // before[b] = blocks ordered strictly before b

  bool operator==(const Universe&) const = default;
  BlockSet before_of(int b) const {
    return b < static_cast<int>(before.size()) ? before[b] : 0;
  }
};

// Computes the transitive closure of `pairs` over n blocks; returns nullopt
// when the closure is not irreflexive (i.e. not a strict partial order) or
// when it mentions blocks outside exist / avail is not a subset of exist.
std::optional<Universe> make_universe(int n, BlockSet exist, BlockSet avail,
                                      const std::vector<std::pair<int, int>>& pairs);

using Belief = std::vector<Universe>;  // a set of universes
using State = BlockSet;
using Adds = std::vector<State>;       // a set of states

// All universes over n blocks with empty order (availability-only models).
std::vector<Universe> all_orderless_universes(int n);

// Belief refinement by an ordered observation sequence.
Belief refine(const Belief& belief, const std::vector<int>& observed);

// True iff blocks are available in every universe of the belief.
// An empty belief is degenerate: every predicate holds vacuously.
bool is_available(const Belief& belief, BlockSet blocks);
bool is_degenerate(const Belief& belief);

struct NotAState : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// True iff no state of `adds` conflicting with `state` can exist in any
// believed universe. Throws NotAState when state is not in adds.
bool is_incontrovertible(const Belief& belief, const Adds& adds, State state);

// The available, incontrovertible portion of the structure: the union of
// qualifying states.
State view(const Belief& belief, const Adds& adds);

Adds adds_union(const Adds& d1, const Adds& d2);
Adds adds_intersection(const Adds& d1, const Adds& d2);

// ---------------------------------------------------------------------------
// Attestation interpretations (types-as-beliefs)
// ---------------------------------------------------------------------------

// Attestation table for a model: which blocks are attestations, by whom,
// about which subjects.
struct AttestationTable {
  struct AvailabilityEntry {
    int block;            // the attestation block
    std::string issuer;
    BlockSet subjects;    // pledged available if the attestation exists
  };
  struct CommitEntry {
    int block;
    std::string issuer;
    int subject;          // the block committed to
  };
  std::vector<AvailabilityEntry> availability;
  std::vector<CommitEntry> commits;
};

// Universes where every availability attestation by `issuer` that exists has
// all its subjects available.
Belief interpret_store_forever(const std::string& issuer, const Belief& universes,
                               const AttestationTable& table);

// Universes where `issuer` never commits to two different subjects.
Belief interpret_exclusive_commit(const std::string& issuer, const Belief& universes,
                                  const AttestationTable& table);

Belief belief_union(const Belief& a, const Belief& b);
Belief belief_intersection(const Belief& a, const Belief& b);

// ---------------------------------------------------------------------------
// Theorem checkers
// ---------------------------------------------------------------------------

// Exhaustive check of view(a, D op D') == view(a,D) op view(a,D') over every
// ADDS pair on a small ground set and every belief over orderless universes.
// The belief quantifier is handled exactly: a state's view membership is a
// per-universe conjunction, so equality for all beliefs reduces to mutual
// domination of qualifying-universe sets (checked per block).
//
// require_empty_state: quantify only over structures containing the empty
// state. consistent_only: quantify only over beliefs whose universes uphold
// the structures' integrity (no two conflicting states of either structure
// can coexist) and availability (any state that can exist stays available),
// the assumptions an observer of both structures holds anyway.
struct TheoremReport {
  uint64_t pairs_checked = 0;
  uint64_t counterexamples = 0;
  std::string first_counterexample;  // human-readable, empty when none
};

TheoremReport check_union_theorem(int nblocks, bool require_empty_state,
                                  bool consistent_only);
// The intersection identity additionally requires downward-closed structures
// (every subset of a state is a state); require_downward_closed quantifies
// over those only.
TheoremReport check_intersection_theorem(int nblocks, bool require_empty_state,
                                         bool consistent_only,
                                         bool require_downward_closed = false);

// Availability monotonicity over a universe set: existence-dominated
// universes never lose proven availability.
bool availability_monotone(const Belief& universes);

// Integrity monotonicity: observing more can only shrink the belief.
// Checked for all observation sequences over n blocks.
bool refine_monotone(const Belief& belief, int nblocks);

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuerySpec {
  enum Kind { View, Available, Incontrovertible } kind;
  std::string adds_name;         // View / Incontrovertible
  BlockSet blocks = 0;           // Available: the block set; Incontrovertible: the state
  std::vector<int> observe;      // observation sequence applied first
  std::string expect;            // expected result, textual
};

struct Model {
  std::vector<std::string> block_names;
  AttestationTable attestations;
  Belief universes;                     // explicit, or generated by "universes all"
  std::map<std::string, Adds> structures;
  // trust declarations: issuer -> avail|commit, intersected into the base belief
  std::vector<std::pair<std::string, std::string>> trusts;
  std::vector<QuerySpec> queries;

  int block_id(const std::string& name) const;  // throws ParseError
  std::string set_names(BlockSet s) const;
  Belief initial_belief() const;  // universes filtered by the trust table
};

Model parse_model(std::istream& in);
Model parse_model_text(const std::string& text);

// Runs every query in the model; returns human-readable failures, empty if
// all pass.
std::vector<std::string> run_queries(const Model& model);

}  // namespace charlotte::calculus
