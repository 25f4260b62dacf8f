#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gridlaa/errors.hpp"
#include "gridlaa/types.hpp"

namespace gridlaa {

enum class BusKind { generator, load };

struct BusRecord {
    int id = 0;                  // external bus number from the case file
    BusKind kind = BusKind::load;
    double demand_pu = 0.0;      // Pd / baseMVA
    double base_kv = 0.0;

    bool operator==(const BusRecord&) const = default;
};

struct GenRecord {
    int bus = 0;
    double capacity_pu = 0.0;    // Pmax / baseMVA
    bool in_service = true;

    bool operator==(const GenRecord&) const = default;
};

struct BranchRecord {
    int from = 0;
    int to = 0;
    double reactance = 0.0;      // series x, p.u.
    bool in_service = true;

    bool operator==(const BranchRecord&) const = default;
};

struct LoadRecord {
    int bus = 0;
    double demand_pu = 0.0;          // pre-attack steady demand p^LS
    double vulnerable_fraction = 1.0;  // share of demand an attacker can reach

    bool operator==(const LoadRecord&) const = default;
};

/// A parsed network in canonical order: generator buses first (ascending id),
/// then load buses (ascending id). A bus is a generator bus iff it hosts at
/// least one in-service generator; every other bus is a load bus, demand or
/// not. Loads co-located with generators are dropped at parse time (warning).
struct GridCase {
    std::string name;
    double base_mva = 100.0;
    std::vector<BusRecord> buses;       // canonical order
    std::vector<GenRecord> generators;  // ascending bus id
    std::vector<BranchRecord> branches; // case file order
    std::vector<LoadRecord> loads;      // ascending bus id, one per load bus

    int n_bus() const { return static_cast<int>(buses.size()); }
    int n_gen() const;
    int n_load() const { return static_cast<int>(loads.size()); }

    /// Canonical index of an external bus id; throws ValidationError if unknown.
    BusIndex index_of(int bus_id) const;
    /// Position of a generator bus id inside the generator block, or of a load
    /// bus id inside the load block; throws if the bus is of the other kind.
    int gen_position(int bus_id) const;
    int load_position(int bus_id) const;

    bool operator==(const GridCase&) const = default;
};

struct ParsedCase {
    GridCase grid;
    std::vector<std::string> warnings;
};

/// Parses the supported MATPOWER subset: `mpc.baseMVA`, `mpc.bus`, `mpc.gen`
/// and `mpc.branch` matrices of a standard case .m file. Only bus numbers,
/// demands, base kV, generator bus/status/capacity and branch endpoints,
/// series reactance and status are consumed; all other columns are ignored.
/// Throws ParseError (with line/column) on malformed text and ValidationError
/// on structural problems (duplicate ids, dangling branches, nonpositive
/// reactance, disconnected graph, no generators, no loads).
ParsedCase parse_case(std::string_view text, std::string_view name = "case");

/// Writes the documented MATPOWER subset so that parse(serialize(g)) == g for
/// a canonical GridCase. Deterministic field order, 9 significant digits.
std::string serialize_case(const GridCase& grid);

}  // namespace gridlaa
