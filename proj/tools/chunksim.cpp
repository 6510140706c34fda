// Command-line front end: single runs, sweeps, the closed-form delay bound,
// range extraction from sweep output and trace checking.

#include <chunksim/analytics.hpp>
#include <chunksim/engine.hpp>
#include <chunksim/harness.hpp>
#include <chunksim/model.hpp>
#include <chunksim/tracecheck.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using namespace chunksim;

namespace {

nlohmann::json report_json(RunResult const& r, SimConfig const& c)
{
	auto const& m = r.report;
	return {
		{"miss_ratio", m.miss_ratio},
		{"avg_delay", m.avg_delay},
		{"goodput", m.goodput},
		{"throughput", m.throughput},
		{"overhead", m.overhead},
		{"overhead_control", m.control_rate},
		{"overhead_duplicate", m.duplicate_data_rate},
		{"chunks_eligible", m.chunks_eligible},
		{"chunks_missed", m.chunks_missed},
		{"late_deliveries", m.late_deliveries},
		{"duplicate_deliveries", m.duplicate_deliveries},
		{"median_rtt", r.median_rtt},
		{"d_min", d_min(c)},
		{"events", r.events},
		{"seed", c.seed},
	};
}

void write_text(std::optional<std::string> const& path, std::string const& text)
{
	if (!path) {
		std::cout << text;
		return;
	}
	std::ofstream out(*path, std::ios::binary);
	if (!out) throw Error("cannot write '" + *path + "'");
	out << text;
	if (!out) throw Error("error writing '" + *path + "'");
}

std::string ranges_csv(std::vector<RangeRow> const& rows)
{
	std::vector<std::string> cols;
	for (auto const& r : rows)
		for (auto const& [k, v] : r.group.items())
			if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
	std::string out;
	for (auto const& c : cols) out += c + ",";
	out += "c_low,c_high,note\n";
	for (auto const& r : rows) {
		for (auto const& c : cols) {
			if (r.group.contains(c)) {
				auto const& v = r.group[c];
				out += v.is_string() ? v.get<std::string>() : v.dump();
			}
			out += ",";
		}
		if (r.range) {
			char buf[80];
			std::snprintf(buf, sizeof(buf), "%.6g,%.6g,", r.range->c_low, r.range->c_high);
			out += buf;
		}
		else out += "NA,NA," + r.error;
		out += "\n";
	}
	return out;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Push-based epidemic live-streaming simulator"};
	app.require_subcommand(1);

	// simulate
	auto* sim = app.add_subcommand("simulate", "run one simulation and print its metrics as JSON");
	std::string config_path;
	std::optional<std::uint64_t> seed;
	std::optional<std::string> trace_path;
	std::optional<std::string> latency;
	bool print_config = false;
	sim->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
	sim->add_option("--seed", seed, "override the config seed");
	sim->add_option("--trace", trace_path, "write the event trace to this file");
	sim->add_option("--latency", latency,
		"constant:<ms> | matrix:<path>:<scale> | lognormal:<median_ms>:<sigma>");
	sim->add_flag("--print-config", print_config, "print the effective config and exit");

	// sweep
	auto* sweep = app.add_subcommand("sweep", "run a parameter sweep and write CSV");
	std::optional<std::string> preset_id;
	std::optional<std::string> spec_path;
	std::optional<std::string> out_path;
	std::optional<std::string> sweep_latency;
	std::optional<int> seed_count;
	bool desk = false;
	unsigned threads = 0;
	auto* preset_opt = sweep->add_option("--preset", preset_id, "fig1 .. fig6, fig5a, fig5b")
		->check(CLI::IsMember(preset_names()));
	auto* spec_opt = sweep->add_option("--spec", spec_path, "JSON sweep spec")->check(CLI::ExistingFile);
	preset_opt->excludes(spec_opt);
	sweep->add_option("--out", out_path, "CSV output path (default: stdout)");
	sweep->add_option("--latency", sweep_latency, "latency model for every point (see simulate)");
	sweep->add_option("--seeds", seed_count, "use seeds 1..N")->check(CLI::PositiveNumber);
	sweep->add_flag("--desk", desk, "preset with 300 peers instead of 1000");
	sweep->add_option("--threads", threads, "worker threads (0: all cores)");

	// dmin
	auto* dmin = app.add_subcommand("dmin", "closed-form minimal diffusion delay");
	int dm = 1;
	double dc = 0.0;
	int dn = 1000;
	double ds = 0.9;
	dmin->add_option("--m", dm, "parallel uploads")->required();
	dmin->add_option("--c", dc, "chunk size (Mb)")->required();
	dmin->add_option("--n", dn, "peers")->required();
	dmin->add_option("--s", ds, "stream rate (Mb/s)")->required();

	// range
	auto* range = app.add_subcommand("range", "suitable chunk-size range from a sweep CSV");
	std::string csv_path;
	RangeThresholds th;
	range->add_option("--csv", csv_path, "sweep output")->required()->check(CLI::ExistingFile);
	range->add_option("--loss", th.loss, "miss ratio bounding the lower end");
	range->add_option("--plateau", th.plateau, "miss ratio bounding the upper end");

	// tracecheck
	auto* tc = app.add_subcommand("tracecheck", "validate a trace against the model");
	std::string tc_trace;
	std::string tc_config;
	tc->add_option("--trace", tc_trace, "trace file")->required()->check(CLI::ExistingFile);
	tc->add_option("--config", tc_config, "config the trace was produced with")->required()
		->check(CLI::ExistingFile);

	CLI11_PARSE(app, argc, argv);

	try {
		if (*sim) {
			SimConfig c = load_config(config_path);
			if (seed) c.seed = *seed;
			if (latency) c.latency = parse_latency_spec(*latency);
			c = validate(c);
			if (print_config) {
				std::cout << dump_config(c);
				return 0;
			}
			std::optional<std::ofstream> trace;
			if (trace_path) {
				trace.emplace(*trace_path, std::ios::binary);
				if (!*trace) throw Error("cannot write '" + *trace_path + "'");
			}
			RunResult r = run(c, trace ? &*trace : nullptr);
			std::cout << report_json(r, c).dump(2) << "\n";
		}
		else if (*sweep) {
			if (!preset_id && !spec_path) throw CLI::RequiredError("--preset or --spec");
			SweepSpec spec = preset_id ? preset(*preset_id, desk) : load_sweep_spec(*spec_path);
			if (sweep_latency) {
				spec.base.latency = parse_latency_spec(*sweep_latency);
				spec.base = validate(spec.base);
			}
			if (seed_count) {
				spec.seeds.clear();
				for (int i = 1; i <= *seed_count; ++i) spec.seeds.push_back(static_cast<std::uint64_t>(i));
			}
			write_text(out_path, to_csv(run_sweep(spec, threads), spec.thresholds));
		}
		else if (*dmin) {
			std::printf("%.9g\n", d_min(dm, dc, dn, ds));
		}
		else if (*range) {
			std::ifstream in(csv_path);
			auto rows = ranges_from_csv(read_csv(in), th);
			std::cout << ranges_csv(rows);
			bool const any = std::any_of(rows.begin(), rows.end(), [](auto const& r) { return r.range.has_value(); });
			if (!any) {
				std::cerr << "error: no group of points brackets the thresholds\n";
				return 1;
			}
		}
		else if (*tc) {
			SimConfig c = load_config(tc_config);
			std::ifstream in(tc_trace);
			auto result = check_trace(in, c);
			for (auto const& v : result.violations)
				std::printf("%.17g\t%s\t%s\n", v.time, std::string(to_string(v.rule)).c_str(), v.description.c_str());
			std::fprintf(stderr, "%zu lines, %zu violation(s)\n", result.lines, result.total);
			return result.ok() ? 0 : 1;
		}
	}
	catch (CLI::Error const& e) {
		return app.exit(e);
	}
	catch (std::exception const& e) {
		std::cerr << "error: " << e.what() << "\n";
		return 1;
	}
	return 0;
}
