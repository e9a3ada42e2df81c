#include "charlotte/calculus.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <sstream>
#include <unordered_set>

namespace charlotte::calculus {

std::optional<Universe> make_universe(int n, BlockSet exist, BlockSet avail,
                                      const std::vector<std::pair<int, int>>& pairs) {
  if (!subset(avail, exist)) return std::nullopt;
  Universe u;
  u.exist = exist;
  u.avail = avail;
  u.before.assign(n, 0);
  for (auto [a, b] : pairs) {
    if (a < 0 || a >= n || b < 0 || b >= n) return std::nullopt;
    if (!subset(bit(a) | bit(b), exist)) return std::nullopt;
    u.before[b] |= bit(a);
  }
  // transitive closure (before[b] |= before of each predecessor)
  bool changed = true;
  while (changed) {
    changed = false;
    for (int b = 0; b < n; ++b) {
      BlockSet preds = u.before[b];
      BlockSet widened = preds;
      for (int a = 0; a < n; ++a)
        if (preds & bit(a)) widened |= u.before[a];
      if (widened != preds) {
        u.before[b] = widened;
        changed = true;
      }
    }
  }
  for (int b = 0; b < n; ++b)
    if (u.before[b] & bit(b)) return std::nullopt;  // not irreflexive
  return u;
}

std::vector<Universe> all_orderless_universes(int n) {
  std::vector<Universe> out;
  for (BlockSet exist = 0; exist < bit(n); ++exist) {
    // enumerate subsets of exist
    BlockSet avail = exist;
    while (true) {
      Universe u;
      u.exist = exist;
      u.avail = avail;
      u.before.assign(n, 0);
      out.push_back(std::move(u));
      if (avail == 0) break;
      avail = (avail - 1) & exist;
    }
  }
  return out;
}

Belief refine(const Belief& belief, const std::vector<int>& observed) {
  BlockSet observed_mask = 0;
  std::array<int, kMaxBlocks> pos;
  pos.fill(-1);
  for (size_t i = 0; i < observed.size(); ++i) {
    int b = observed[i];
    if (pos[b] == -1) pos[b] = static_cast<int>(i);
    observed_mask |= bit(b);
  }
  Belief out;
  for (const Universe& u : belief) {
    if (!subset(observed_mask, u.exist)) continue;
    bool ok = true;
    for (int b : observed) {
      BlockSet preds = u.before_of(b);
      if (!subset(preds, observed_mask)) {
        ok = false;
        break;
      }
      for (int a = 0; a < kMaxBlocks && ok; ++a)
        if ((preds & bit(a)) && pos[a] >= pos[b]) ok = false;
      if (!ok) break;
    }
    if (ok) out.push_back(u);
  }
  return out;
}

bool is_degenerate(const Belief& belief) { return belief.empty(); }

bool is_available(const Belief& belief, BlockSet blocks) {
  for (const Universe& u : belief)
    if (!subset(blocks, u.avail)) return false;
  return true;
}

bool is_incontrovertible(const Belief& belief, const Adds& adds, State state) {
  if (std::find(adds.begin(), adds.end(), state) == adds.end())
    throw NotAState("state is not a member of the structure");
  std::unordered_set<State> members(adds.begin(), adds.end());
  for (const Universe& u : belief)
    for (State other : adds) {
      if (members.count(state | other)) continue;
      if (!subset(other, u.exist)) continue;
      return false;
    }
  return true;
}

// A state is in the view iff it is available in every believed universe and
// incontrovertible: any coexisting state must merge with it inside the
// structure.
State view(const Belief& belief, const Adds& adds) {
  State result = 0;
  std::unordered_set<State> members(adds.begin(), adds.end());
  for (State s : adds) {
    bool ok = true;
    for (const Universe& u : belief) {
      if (!subset(s, u.avail)) {
        ok = false;
        break;
      }
      for (State other : adds) {
        if (members.count(s | other)) continue;
        if (!subset(other, u.exist)) continue;
        ok = false;
        break;
      }
      if (!ok) break;
    }
    if (ok) result |= s;
  }
  return result;
}

namespace {

Adds dedup(Adds d) {
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  return d;
}

}  // namespace

Adds adds_union(const Adds& d1, const Adds& d2) {
  Adds out;
  out.reserve(d1.size() * d2.size());
  for (State a : d1)
    for (State b : d2) out.push_back(a | b);
  return dedup(std::move(out));
}

Adds adds_intersection(const Adds& d1, const Adds& d2) {
  Adds out;
  out.reserve(d1.size() * d2.size());
  for (State a : d1)
    for (State b : d2) out.push_back(a & b);
  return dedup(std::move(out));
}

Belief interpret_store_forever(const std::string& issuer, const Belief& universes,
                               const AttestationTable& table) {
  Belief out;
  for (const Universe& u : universes) {
    bool ok = true;
    for (const auto& e : table.availability) {
      if (e.issuer != issuer) continue;
      if ((u.exist & bit(e.block)) && !subset(e.subjects, u.avail)) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(u);
  }
  return out;
}

Belief interpret_exclusive_commit(const std::string& issuer, const Belief& universes,
                                  const AttestationTable& table) {
  Belief out;
  for (const Universe& u : universes) {
    bool ok = true;
    for (size_t i = 0; i < table.commits.size() && ok; ++i) {
      const auto& a = table.commits[i];
      if (a.issuer != issuer || !(u.exist & bit(a.block))) continue;
      for (size_t j = i + 1; j < table.commits.size(); ++j) {
        const auto& b = table.commits[j];
        if (b.issuer != issuer || !(u.exist & bit(b.block))) continue;
        if (a.subject != b.subject) {
          ok = false;
          break;
        }
      }
    }
    if (ok) out.push_back(u);
  }
  return out;
}

namespace {

bool universe_member(const Belief& b, const Universe& u) {
  return std::find(b.begin(), b.end(), u) != b.end();
}

}  // namespace

Belief belief_union(const Belief& a, const Belief& b) {
  Belief out = a;
  for (const Universe& u : b)
    if (!universe_member(out, u)) out.push_back(u);
  return out;
}

Belief belief_intersection(const Belief& a, const Belief& b) {
  Belief out;
  for (const Universe& u : a)
    if (universe_member(b, u)) out.push_back(u);
  return out;
}

// ---------------------------------------------------------------------------
// Theorem checkers
// ---------------------------------------------------------------------------

namespace {

// n=3 ground set: states are 3-bit masks, structures are 8-bit state masks,
// orderless universes are (exist, avail) classes indexed into 27 bits.
struct TheoremContext {
  int n;
  std::vector<std::pair<BlockSet, BlockSet>> classes;  // (exist, avail)

  explicit TheoremContext(int nblocks) : n(nblocks) {
    for (BlockSet exist = 0; exist < bit(n); ++exist) {
      BlockSet avail = exist;
      while (true) {
        classes.emplace_back(exist, avail);
        if (avail == 0) break;
        avail = (avail - 1) & exist;
      }
    }
  }

  // does state s qualify for the view under structure d in universe class c
  bool qualifies(unsigned d, State s, size_t c) const {
    auto [exist, avail] = classes[c];
    if (!subset(s, avail)) return false;
    for (State other = 0; other < 8; ++other) {
      if (!(d & (1u << other))) continue;
      if (d & (1u << (s | other))) continue;  // merges back into the structure
      if (subset(other, exist)) return false;
    }
    return true;
  }

  uint32_t qmask(unsigned d, State s) const {
    uint32_t m = 0;
    for (size_t c = 0; c < classes.size(); ++c)
      if (qualifies(d, s, c)) m |= uint32_t{1} << c;
    return m;
  }

  // universe classes upholding the structure's integrity (no two coexisting
  // conflicting states) and availability (possible states stay available)
  uint32_t consistent_mask(unsigned d) const {
    uint32_t m = 0;
    for (size_t c = 0; c < classes.size(); ++c) {
      auto [exist, avail] = classes[c];
      bool ok = true;
      for (State s1 = 0; s1 < 8 && ok; ++s1) {
        if (!(d & (1u << s1)) || !subset(s1, exist)) continue;
        if (!subset(s1, avail)) {
          ok = false;
          break;
        }
        for (State s2 = s1; s2 < 8; ++s2) {
          if (!(d & (1u << s2)) || !subset(s2, exist)) continue;
          if (!(d & (1u << (s1 | s2)))) {
            ok = false;
            break;
          }
        }
      }
      if (ok) m |= uint32_t{1} << c;
    }
    return m;
  }
};

std::string state_names(State s, int n) {
  std::string out = "{";
  bool first = true;
  for (int i = 0; i < n; ++i)
    if (s & bit(i)) {
      if (!first) out += ",";
      out += static_cast<char>('a' + i);
      first = false;
    }
  return out + "}";
}

std::string adds_desc(unsigned d, int n) {
  std::string out = "[";
  bool first = true;
  for (State s = 0; s < 8; ++s)
    if (d & (1u << s)) {
      if (!first) out += " ";
      out += state_names(s, n);
      first = false;
    }
  return out + "]";
}

bool downward_closed(unsigned d) {
  for (State s = 0; s < 8; ++s) {
    if (!(d & (1u << s))) continue;
    for (State sub = s;; sub = (sub - 1) & s) {
      if (!(d & (1u << sub))) return false;
      if (sub == 0) break;
    }
  }
  return true;
}

TheoremReport check_view_theorem(int nblocks, bool require_empty_state,
                                 bool consistent_only, bool use_union,
                                 bool require_downward_closed = false) {
  if (nblocks != 3)
    throw std::invalid_argument("exhaustive theorem check is sized for 3 blocks");
  TheoremContext ctx(nblocks);

  // Precompute per-structure data.
  std::array<std::array<uint32_t, 8>, 256> q{};
  std::array<uint32_t, 256> consistent{};
  for (unsigned d = 1; d < 256; ++d) {
    for (State s = 0; s < 8; ++s)
      if (d & (1u << s)) q[d][s] = ctx.qmask(d, s);
    consistent[d] = ctx.consistent_mask(d);
  }

  TheoremReport report;
  for (unsigned d1 = 1; d1 < 256; ++d1) {
    if (require_empty_state && !(d1 & 1)) continue;
    if (require_downward_closed && !downward_closed(d1)) continue;
    for (unsigned d2 = 1; d2 < 256; ++d2) {
      if (require_empty_state && !(d2 & 1)) continue;
      if (require_downward_closed && !downward_closed(d2)) continue;
      unsigned combined = 0;
      for (State s = 0; s < 8; ++s) {
        if (!(d1 & (1u << s))) continue;
        for (State t = 0; t < 8; ++t)
          if (d2 & (1u << t)) combined |= 1u << (use_union ? (s | t) : (s & t));
      }
      uint32_t domain = ~uint32_t{0};
      if (consistent_only) domain = consistent[d1] & consistent[d2];
      ++report.pairs_checked;

      bool failed = false;
      for (int x = 0; x < nblocks && !failed; ++x) {
        // families of qualifying-universe sets for block x, both sides:
        // a belief sees x on a side iff it is a subset of some family member
        uint32_t a_family[8];
        int a_count = 0;
        for (State t = 0; t < 8; ++t)
          if ((combined & (1u << t)) && (t & bit(x)))
            a_family[a_count++] = q[combined][t] & domain;
        uint32_t b_family[64];
        int b_count = 0;
        if (use_union) {
          // x in view(D) or in view(D')
          for (State s = 0; s < 8; ++s)
            if ((d1 & (1u << s)) && (s & bit(x))) b_family[b_count++] = q[d1][s] & domain;
          for (State s = 0; s < 8; ++s)
            if ((d2 & (1u << s)) && (s & bit(x))) b_family[b_count++] = q[d2][s] & domain;
        } else {
          // x in view(D) and in view(D'): meets of witnessing sets
          for (State s = 0; s < 8; ++s) {
            if (!((d1 & (1u << s)) && (s & bit(x)))) continue;
            for (State t = 0; t < 8; ++t)
              if ((d2 & (1u << t)) && (t & bit(x)))
                b_family[b_count++] = q[d1][s] & q[d2][t] & domain;
          }
        }

        auto dominated = [](uint32_t v, const uint32_t* fam, int count) {
          for (int i = 0; i < count; ++i)
            if ((v & ~fam[i]) == 0) return true;
          return false;
        };
        for (int i = 0; i < a_count && !failed; ++i)
          if (!dominated(a_family[i], b_family, b_count)) failed = true;
        for (int i = 0; i < b_count && !failed; ++i)
          if (!dominated(b_family[i], a_family, a_count)) failed = true;
      }
      if (failed) {
        ++report.counterexamples;
        if (report.first_counterexample.empty()) {
          report.first_counterexample = std::string(use_union ? "union" : "intersection") +
                                        " D=" + adds_desc(d1, nblocks) +
                                        " D'=" + adds_desc(d2, nblocks);
        }
      }
    }
  }
  return report;
}

}  // namespace

TheoremReport check_union_theorem(int nblocks, bool require_empty_state,
                                  bool consistent_only) {
  return check_view_theorem(nblocks, require_empty_state, consistent_only, true);
}

TheoremReport check_intersection_theorem(int nblocks, bool require_empty_state,
                                         bool consistent_only,
                                         bool require_downward_closed) {
  return check_view_theorem(nblocks, require_empty_state, consistent_only, false,
                            require_downward_closed);
}

bool availability_monotone(const Belief& universes) {
  for (const Universe& u : universes)
    for (const Universe& v : universes)
      for (const Universe& w : universes) {
        if (!subset(u.exist | v.exist, w.exist)) continue;
        if (!subset(u.avail | v.avail, w.avail)) return false;
      }
  return true;
}

bool refine_monotone(const Belief& belief, int nblocks) {
  // every single-step extension of an observation sequence shrinks the result
  std::vector<std::vector<int>> seqs{{}};
  for (int len = 0; len < nblocks; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& seq : seqs) {
      Belief base = refine(belief, seq);
      for (int b = 0; b < nblocks; ++b) {
        if (std::find(seq.begin(), seq.end(), b) != seq.end()) continue;
        auto extended = seq;
        extended.push_back(b);
        Belief narrowed = refine(belief, extended);
        for (const Universe& u : narrowed)
          if (std::find(base.begin(), base.end(), u) == base.end()) return false;
        if (narrowed.size() > base.size()) return false;
        next.push_back(std::move(extended));
      }
    }
    seqs = std::move(next);
  }
  return true;
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

int Model::block_id(const std::string& name) const {
  for (size_t i = 0; i < block_names.size(); ++i)
    if (block_names[i] == name) return static_cast<int>(i);
  throw ParseError("unknown block: " + name);
}

std::string Model::set_names(BlockSet s) const {
  std::string out;
  for (size_t i = 0; i < block_names.size(); ++i)
    if (s & bit(static_cast<int>(i))) {
      if (!out.empty()) out += ",";
      out += block_names[i];
    }
  return out.empty() ? "-" : out;
}

Belief Model::initial_belief() const {
  Belief b = universes;
  for (const auto& [issuer, kind] : trusts) {
    if (kind == "avail")
      b = interpret_store_forever(issuer, b, attestations);
    else
      b = interpret_exclusive_commit(issuer, b, attestations);
  }
  return b;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

BlockSet parse_set(const Model& m, const std::string& text) {
  if (text.empty() || text == "-") return 0;
  BlockSet s = 0;
  for (const std::string& name : split(text, ','))
    s |= bit(m.block_id(name));
  return s;
}

}  // namespace

Model parse_model(std::istream& in) {
  Model m;
  bool universes_all = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    auto fail = [&](const std::string& msg) {
      throw ParseError("line " + std::to_string(lineno) + ": " + msg);
    };
    if (word == "blocks") {
      std::string name;
      while (ls >> name) {
        m.block_names.push_back(name);
        if (m.block_names.size() > kMaxBlocks) fail("too many blocks");
      }
    } else if (word == "attest") {
      std::string kind, block, issuer;
      if (!(ls >> kind >> block >> issuer)) fail("attest needs kind, block, issuer");
      if (kind == "avail") {
        AttestationTable::AvailabilityEntry e;
        e.block = m.block_id(block);
        e.issuer = issuer;
        std::string subject;
        while (ls >> subject) e.subjects |= bit(m.block_id(subject));
        if (e.subjects == 0) fail("avail attestation needs subjects");
        m.attestations.availability.push_back(e);
      } else if (kind == "commit") {
        std::string subject;
        if (!(ls >> subject)) fail("commit attestation needs a subject");
        m.attestations.commits.push_back(
            {m.block_id(block), issuer, m.block_id(subject)});
      } else {
        fail("unknown attestation kind: " + kind);
      }
    } else if (word == "universes") {
      std::string mode;
      ls >> mode;
      if (mode != "all") fail("expected 'universes all'");
      universes_all = true;
    } else if (word == "universe") {
      BlockSet exist = 0, avail = 0;
      std::vector<std::pair<int, int>> pairs;
      std::string item;
      while (ls >> item) {
        if (item.rfind("exist=", 0) == 0) {
          exist = parse_set(m, item.substr(6));
        } else if (item.rfind("avail=", 0) == 0) {
          avail = parse_set(m, item.substr(6));
        } else if (item.rfind("order=", 0) == 0) {
          std::string spec = item.substr(6);
          if (spec.empty() || spec == "-") continue;
          for (const std::string& pair : split(spec, ',')) {
            auto lt = pair.find('<');
            if (lt == std::string::npos) fail("order pair needs '<'");
            pairs.emplace_back(m.block_id(pair.substr(0, lt)),
                               m.block_id(pair.substr(lt + 1)));
          }
        } else {
          fail("unknown universe item: " + item);
        }
      }
      auto u = make_universe(static_cast<int>(m.block_names.size()), exist, avail, pairs);
      if (!u) fail("invalid universe");
      m.universes.push_back(*u);
    } else if (word == "adds") {
      std::string name, states;
      if (!(ls >> name >> states)) fail("adds needs name and states");
      Adds d;
      for (const std::string& st : split(states, '|')) d.push_back(parse_set(m, st));
      std::sort(d.begin(), d.end());
      d.erase(std::unique(d.begin(), d.end()), d.end());
      m.structures[name] = d;
    } else if (word == "trust") {
      std::string issuer, kind;
      if (!(ls >> issuer >> kind)) fail("trust needs issuer and kind");
      if (kind != "avail" && kind != "commit") fail("trust kind must be avail or commit");
      m.trusts.emplace_back(issuer, kind);
    } else if (word == "query") {
      QuerySpec qs;
      std::string kind;
      if (!(ls >> kind)) fail("query needs a kind");
      std::string item;
      if (kind == "view") {
        if (!(ls >> qs.adds_name)) fail("view query needs a structure name");
        qs.kind = QuerySpec::View;
      } else if (kind == "available") {
        std::string blocks;
        if (!(ls >> blocks)) fail("available query needs blocks");
        qs.kind = QuerySpec::Available;
        qs.blocks = parse_set(m, blocks);
      } else if (kind == "incontrovertible") {
        if (!(ls >> qs.adds_name)) fail("incontrovertible query needs a structure");
        qs.kind = QuerySpec::Incontrovertible;
      } else {
        fail("unknown query kind: " + kind);
      }
      while (ls >> item) {
        if (item.rfind("observe=", 0) == 0) {
          std::string spec = item.substr(8);
          if (!spec.empty() && spec != "-")
            for (const std::string& name : split(spec, ','))
              qs.observe.push_back(m.block_id(name));
        } else if (item.rfind("state=", 0) == 0) {
          qs.blocks = parse_set(m, item.substr(6));
        } else if (item.rfind("expect=", 0) == 0) {
          qs.expect = item.substr(7);
        } else {
          fail("unknown query item: " + item);
        }
      }
      if (qs.expect.empty()) fail("query needs expect=");
      m.queries.push_back(std::move(qs));
    } else {
      fail("unknown directive: " + word);
    }
  }
  if (universes_all) {
    if (!m.universes.empty())
      throw ParseError("'universes all' conflicts with explicit universe lines");
    m.universes = all_orderless_universes(static_cast<int>(m.block_names.size()));
  }
  if (m.block_names.empty()) throw ParseError("model declares no blocks");
  return m;
}

Model parse_model_text(const std::string& text) {
  std::istringstream in(text);
  return parse_model(in);
}

std::vector<std::string> run_queries(const Model& model) {
  std::vector<std::string> failures;
  Belief initial = model.initial_belief();
  for (size_t i = 0; i < model.queries.size(); ++i) {
    const QuerySpec& q = model.queries[i];
    Belief b = refine(initial, q.observe);
    std::string got;
    if (q.kind == QuerySpec::View) {
      auto it = model.structures.find(q.adds_name);
      if (it == model.structures.end()) {
        failures.push_back("query " + std::to_string(i) + ": unknown structure " + q.adds_name);
        continue;
      }
      got = model.set_names(view(b, it->second));
    } else if (q.kind == QuerySpec::Available) {
      got = is_available(b, q.blocks) ? "true" : "false";
    } else {
      auto it = model.structures.find(q.adds_name);
      if (it == model.structures.end()) {
        failures.push_back("query " + std::to_string(i) + ": unknown structure " + q.adds_name);
        continue;
      }
      got = is_incontrovertible(b, it->second, q.blocks) ? "true" : "false";
    }
    if (got != q.expect)
      failures.push_back("query " + std::to_string(i) + ": expected " + q.expect +
                         ", got " + got);
  }
  return failures;
}

}  // namespace charlotte::calculus
