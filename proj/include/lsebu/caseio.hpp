#ifndef LSEBU_CASEIO_HPP
#define LSEBU_CASEIO_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lsebu/errors.hpp"

namespace lsebu {

enum class BusKind { Slack, PV, PQ };
enum class BranchStatus { InService, OutOfService };
enum class GenStatus { On, Off };

struct Bus {
    int id = 0;
    BusKind kind = BusKind::PQ;
    double p_demand = 0.0;   // MW
    double q_demand = 0.0;   // MVAr
    double g_shunt = 0.0;    // MW at 1 p.u.
    double b_shunt = 0.0;    // MVAr at 1 p.u.
    double v_mag_init = 1.0; // p.u.
    double v_ang_init = 0.0; // degrees
    double base_kv = 0.0;
};

struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;       // p.u.
    double x = 0.0;       // p.u.
    double b_total = 0.0; // p.u. total line charging
    double tap = 0.0;     // p.u.; 0 means nominal (1.0)
    double shift = 0.0;   // degrees
    BranchStatus status = BranchStatus::InService;
};

struct Generator {
    int bus = 0;
    double p_gen = 0.0;      // MW
    double q_gen = 0.0;      // MVAr
    double v_setpoint = 1.0; // p.u.
    GenStatus status = GenStatus::On;
};

// Parsed grid model. Bus ids may be sparse; `bus_index` maps id -> dense
// position in `buses` (file order).
struct NetworkCase {
    std::string name = "case";
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Generator> generators;
    std::vector<Branch> branches;
    std::unordered_map<int, std::size_t> bus_index;

    std::size_t index_of(int bus_id) const;
    std::size_t slack_index() const;
};

// Parse the restricted MATPOWER-style text format. Recognized statements:
//   mpc.<name> = <scalar>;
//   mpc.<name> = '<string>';
//   mpc.<name> = [ <rows> ];      rows split on ';' or newline
// '%' starts a line comment, a leading "function ..." line is skipped, and
// unknown mpc fields are ignored. Required: baseMVA, bus, gen, branch.
NetworkCase parse_case(std::string_view text);

NetworkCase load_case_file(const std::string& path);

// Inverse of parse_case up to float formatting; numerics survive the round
// trip to better than 1e-12 relative. Does not validate connectivity.
std::string write_case(const NetworkCase& net);

void save_case_file(const NetworkCase& net, const std::string& path);

// True when every bus is reachable from the slack over in-service branches.
bool is_connected(const NetworkCase& net);

}  // namespace lsebu

#endif
