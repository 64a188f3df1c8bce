#pragma once
// Command-line frontend.  Every toolkit check is exposed as a subcommand
// that reads seeds or JSON input, writes one versioned JSON document to the
// output stream, and encodes the verdict in the exit code:
//
//   0  all checks passed
//   1  at least one check failed (a residual exceeded its tolerance)
//   2  usage error or structurally invalid input
//   3  internal cross-check disagreement (a toolkit bug, never bad input)
//
// Diagnostics go to the error stream; the output stream carries JSON only.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace hf::cli {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kSchema = 1;

// Effective parameters of one invocation after flag parsing.  A single
// struct is shared by all subcommands; each consumes the subset it
// documents and ignores the rest.
struct RunConfig {
    std::string command;
    std::string input;     // JSON file path, or inline JSON when it starts with '{' or '['
    std::string out;       // output file path; empty writes to the output stream
    std::uint64_t seed = 1;
    double tol = 0.0;      // 0 = subcommand default
    int count = 0;         // batch size; 0 = subcommand default
    int n = 0;             // quaternionic dimension; 0 = subcommand default
    int grid = 0;          // lattice points per axis; 0 = subcommand default
    int dim = 4;           // torus dimension (4 or 8)
    int steps = 1000;      // flow iteration cap
    double lr = 0.0;       // flow step size; 0 = automatic
    std::string mode;      // --case / --kind / --class / --level / --jets value
    int which = 1;         // contact-form selector (1..3)
};

struct Command {
    std::string name;
    std::string summary;
    std::vector<std::string> operations;  // library entry points the command reaches
    nlohmann::ordered_json (*run)(const RunConfig&);
};

// All subcommands in dispatch order.  `hyperforge table` prints this same
// table as JSON so external tooling can enumerate it.
const std::vector<Command>& dispatch_table();

// argv-level entry points: parse flags, dispatch, write the JSON document
// to --out or `out`, diagnostics to `err`, and return the exit code.
// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hf::cli
