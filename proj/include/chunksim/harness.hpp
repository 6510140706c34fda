#pragma once

// Parameter sweeps over SimConfig fields, seed replication and CSV output.
//
// A sweep is the cartesian product of its axes (first axis outermost); each
// axis point is a set of field overrides applied to the base config. Dotted
// names reach into nested objects, e.g. "latency.rtt".

#include <chunksim/analytics.hpp>
#include <chunksim/engine.hpp>
#include <chunksim/errors.hpp>
#include <chunksim/model.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace chunksim {

struct Axis
{
	std::vector<std::string> fields;     // union of the fields its points set
	std::vector<nlohmann::json> points;  // objects: field name -> value
};

struct SweepSpec
{
	SimConfig base;
	std::vector<Axis> axes;
	std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
	std::string preset;
	RangeThresholds thresholds;
};

// The metrics a sweep row carries.
struct RowMetrics
{
	double miss_ratio = 0.0;
	double avg_delay = 0.0;
	double goodput = 0.0;
	double throughput = 0.0;
	double overhead_control = 0.0;
	double overhead_duplicate = 0.0;
	double median_rtt = 0.0;
	double d_min = 0.0;

	static constexpr std::size_t count = 8;

	static RowMetrics from(RunResult const& r, SimConfig const& c)
	{
		return {r.report.miss_ratio, r.report.avg_delay, r.report.goodput, r.report.throughput,
			r.report.control_rate, r.report.duplicate_data_rate, r.median_rtt, chunksim::d_min(c)};
	}

	std::array<double, count> values() const
	{
		return {miss_ratio, avg_delay, goodput, throughput, overhead_control, overhead_duplicate,
			median_rtt, d_min};
	}

	static RowMetrics from_values(std::array<double, count> const& v)
	{
		return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
	}

	static std::array<char const*, count> const& names()
	{
		static std::array<char const*, count> const n = {"miss_ratio", "avg_delay", "goodput",
			"throughput", "overhead_control", "overhead_duplicate", "median_rtt", "d_min"};
		return n;
	}
};

struct Replicate
{
	std::vector<RunResult> runs; // one per seed, in seed order
	RowMetrics mean;
	RowMetrics stddev;           // sample standard deviation, 0 for one seed
};

inline std::pair<RowMetrics, RowMetrics> aggregate(std::vector<RowMetrics> const& rows)
{
	std::array<double, RowMetrics::count> mean{};
	std::array<double, RowMetrics::count> sd{};
	if (rows.empty()) return {};
	for (auto const& r : rows) {
		auto v = r.values();
		for (std::size_t k = 0; k < v.size(); ++k) mean[k] += v[k];
	}
	for (auto& x : mean) x /= static_cast<double>(rows.size());
	if (rows.size() > 1) {
		for (auto const& r : rows) {
			auto v = r.values();
			for (std::size_t k = 0; k < v.size(); ++k) sd[k] += (v[k] - mean[k]) * (v[k] - mean[k]);
		}
		for (auto& x : sd) x = std::sqrt(x / static_cast<double>(rows.size() - 1));
	}
	return {RowMetrics::from_values(mean), RowMetrics::from_values(sd)};
}

inline Replicate replicate(SimConfig const& config, std::vector<std::uint64_t> const& seeds)
{
	if (seeds.empty()) throw InvalidConfig("seeds", "need at least one seed");
	Replicate out;
	std::vector<RowMetrics> rows;
	for (auto seed : seeds) {
		SimConfig c = config;
		c.seed = seed;
		out.runs.push_back(run(c));
		rows.push_back(RowMetrics::from(out.runs.back(), c));
	}
	std::tie(out.mean, out.stddev) = aggregate(rows);
	return out;
}

// ---------------------------------------------------------------------------
// points

namespace detail {

inline nlohmann::json::json_pointer field_pointer(std::string const& field)
{
	std::string path;
	std::size_t start = 0;
	while (true) {
		auto dot = field.find('.', start);
		path += "/" + field.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
		if (dot == std::string::npos) break;
		start = dot + 1;
	}
	return nlohmann::json::json_pointer(path);
}

inline void check_field(std::string const& field)
{
	auto head = field.substr(0, field.find('.'));
	if (!config_keys().contains(head) || head == "seed")
		throw InvalidConfig("axes", "cannot sweep over '" + field + "'");
}

} // namespace detail

inline SimConfig apply_overrides(SimConfig const& base, nlohmann::json const& point)
{
	nlohmann::json j = to_json(base);
	for (auto const& [field, value] : point.items()) {
		detail::check_field(field);
		auto ptr = detail::field_pointer(field);
		if (field.find('.') != std::string::npos && !j.contains(ptr.parent_pointer()))
			throw InvalidConfig(field, "no such nested field in the base config");
		j[ptr] = value;
	}
	return config_from_json(j);
}

// Field names varied by the sweep, in axis order.
inline std::vector<std::string> varied_fields(SweepSpec const& spec)
{
	std::vector<std::string> out;
	for (auto const& a : spec.axes)
		for (auto const& f : a.fields)
			if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
	return out;
}

// Every point of the product, as merged override objects.
inline std::vector<nlohmann::json> sweep_points(SweepSpec const& spec)
{
	std::vector<nlohmann::json> points{nlohmann::json::object()};
	for (auto const& axis : spec.axes) {
		if (axis.points.empty()) throw InvalidConfig("axes", "axis without values");
		std::vector<nlohmann::json> next;
		for (auto const& p : points)
			for (auto const& v : axis.points) {
				nlohmann::json merged = p;
				merged.update(v);
				next.push_back(std::move(merged));
			}
		points = std::move(next);
	}
	return points;
}

// ---------------------------------------------------------------------------
// sweep spec files

inline Axis axis_over(std::string const& field, std::vector<nlohmann::json> const& values)
{
	Axis a{{field}, {}};
	for (auto const& v : values) a.points.push_back({{field, v}});
	return a;
}

inline Axis axis_over(std::vector<std::string> const& fields,
	std::vector<std::vector<nlohmann::json>> const& tuples)
{
	Axis a{fields, {}};
	for (auto const& t : tuples) {
		if (t.size() != fields.size()) throw InvalidConfig("axes", "value tuple does not match fields");
		nlohmann::json p = nlohmann::json::object();
		for (std::size_t i = 0; i < fields.size(); ++i) p[fields[i]] = t[i];
		a.points.push_back(std::move(p));
	}
	return a;
}

namespace detail {

inline Axis axis_from_json(nlohmann::json const& j)
{
	if (!j.is_object()) throw InvalidConfig("axes", "each axis must be an object");
	Axis a;
	if (j.contains("field")) {
		check_keys(j, {"field", "values"}, "axes");
		auto field = j.at("field").get<std::string>();
		if (!j.contains("values") || !j["values"].is_array())
			throw InvalidConfig("axes", "'values' list required");
		a = axis_over(field, j["values"].get<std::vector<nlohmann::json>>());
	}
	else if (j.contains("fields")) {
		check_keys(j, {"fields", "values"}, "axes");
		auto fields = j.at("fields").get<std::vector<std::string>>();
		if (!j.contains("values") || !j["values"].is_array())
			throw InvalidConfig("axes", "'values' list required");
		std::vector<std::vector<nlohmann::json>> tuples;
		for (auto const& t : j["values"]) {
			if (!t.is_array()) throw InvalidConfig("axes", "values must be lists when 'fields' is used");
			tuples.push_back(t.get<std::vector<nlohmann::json>>());
		}
		a = axis_over(fields, tuples);
	}
	else if (j.contains("points")) {
		check_keys(j, {"points"}, "axes");
		for (auto const& p : j["points"]) {
			if (!p.is_object()) throw InvalidConfig("axes", "points must be objects");
			for (auto const& [k, v] : p.items())
				if (std::find(a.fields.begin(), a.fields.end(), k) == a.fields.end()) a.fields.push_back(k);
			a.points.push_back(p);
		}
	}
	else throw InvalidConfig("axes", "axis needs 'field', 'fields' or 'points'");
	for (auto const& f : a.fields) check_field(f);
	return a;
}

} // namespace detail

inline SweepSpec preset(std::string const& id, bool desk = false);

// {"preset": id?, "desk": bool?, "base": {config overrides}, "axes": [...],
//  "seeds": [..] or count}
inline SweepSpec sweep_spec_from_json(nlohmann::json const& j)
{
	detail::check_keys(j, {"preset", "desk", "base", "axes", "seeds", "thresholds"}, "");
	bool const desk = j.value("desk", false);
	SweepSpec spec;
	if (j.contains("preset")) spec = preset(j["preset"].get<std::string>(), desk);
	if (j.contains("base")) {
		if (!j["base"].is_object()) throw InvalidConfig("base", "expected an object");
		nlohmann::json b = to_json(spec.base);
		b.merge_patch(j["base"]);
		spec.base = config_from_json(b);
	}
	if (j.contains("axes")) {
		if (!j["axes"].is_array()) throw InvalidConfig("axes", "expected a list");
		spec.axes.clear();
		for (auto const& a : j["axes"]) spec.axes.push_back(detail::axis_from_json(a));
	}
	if (j.contains("seeds")) {
		auto const& s = j["seeds"];
		spec.seeds.clear();
		if (s.is_number_unsigned()) {
			for (std::uint64_t i = 1; i <= s.get<std::uint64_t>(); ++i) spec.seeds.push_back(i);
		}
		else if (s.is_array()) spec.seeds = s.get<std::vector<std::uint64_t>>();
		else throw InvalidConfig("seeds", "expected a count or a list");
	}
	if (j.contains("thresholds")) {
		auto const& t = j["thresholds"];
		detail::check_keys(t, {"loss", "plateau"}, "thresholds");
		spec.thresholds.loss = t.value("loss", spec.thresholds.loss);
		spec.thresholds.plateau = t.value("plateau", spec.thresholds.plateau);
	}
	if (spec.seeds.empty()) throw InvalidConfig("seeds", "need at least one seed");
	return spec;
}

inline SweepSpec load_sweep_spec(std::string const& path)
{
	std::ifstream in(path);
	if (!in) throw InvalidConfig("<file>", "cannot open '" + path + "'");
	nlohmann::json j;
	try {
		j = nlohmann::json::parse(in);
	}
	catch (nlohmann::json::parse_error const& e) {
		throw InvalidConfig("<document>", e.what());
	}
	return sweep_spec_from_json(j);
}

// ---------------------------------------------------------------------------
// presets

inline std::vector<nlohmann::json> chunk_grid()
{
	return {0.02, 0.035, 0.06, 0.1, 0.15, 0.2, 0.3, 0.4, 0.6};
}

inline std::vector<std::string> const& preset_names()
{
	static std::vector<std::string> const names = {"fig1", "fig2", "fig3", "fig4", "fig5", "fig5a",
		"fig5b", "fig6"};
	return names;
}

// Sweeps behind each figure. `desk` shrinks the population to 300 peers.
inline SweepSpec preset(std::string const& id, bool desk)
{
	SweepSpec spec;
	spec.preset = id;
	if (desk) spec.base.n = 300;

	std::vector<std::string> const pair = {"max_parallel_uploads", "probe_set_size"};
	auto equal_pairs = [&](std::vector<int> const& ms) {
		std::vector<std::vector<nlohmann::json>> t;
		for (int m : ms) t.push_back({m, m});
		return axis_over(pair, t);
	};
	auto probe_grid = [&] {
		std::vector<std::vector<nlohmann::json>> t;
		for (int mp = 1; mp <= 4; ++mp)
			for (int m = mp; m <= 6; ++m) t.push_back({mp, m});
		return axis_over(pair, t);
	};

	if (id == "fig1" || id == "fig2") {
		spec.axes = {equal_pairs({1, 2, 3, 4, 5}), axis_over("chunk_size", chunk_grid())};
	}
	else if (id == "fig3") {
		spec.axes = {equal_pairs({1, 5}), axis_over("chunk_size", chunk_grid())};
	}
	else if (id == "fig4") {
		spec.axes = {axis_over("latency_scale", {0.5, 1.0, 2.0}), axis_over("chunk_size", chunk_grid())};
	}
	else if (id == "fig5a" || id == "fig5b") {
		spec.base.chunk_size = id == "fig5a" ? 0.15 : 0.035;
		spec.axes = {probe_grid()};
	}
	else if (id == "fig5") {
		spec.axes = {axis_over("chunk_size", {0.15, 0.035}), probe_grid()};
	}
	else if (id == "fig6") {
		spec.base.upload_dist = BandwidthDist::heterogeneous_preset();
		spec.axes = {axis_over("scheme", {"rp_lu", "rp_lb", "ba_lu"}),
			axis_over("latency.rtt", {0.05, 0.1}), axis_over("chunk_size", chunk_grid())};
	}
	else throw InvalidConfig("preset", "unknown preset '" + id + "'");
	return spec;
}

// ---------------------------------------------------------------------------
// running and CSV

struct SweepRow
{
	std::size_t point = 0;
	std::uint64_t seed = 0;
	RowMetrics metrics;
};

struct SweepResult
{
	std::vector<std::string> fields;
	std::vector<nlohmann::json> points;
	std::vector<SweepRow> runs;     // sorted by point, then by seed order
	std::vector<RowMetrics> mean;   // per point
	std::vector<RowMetrics> stddev; // per point
	std::vector<SimConfig> configs; // per point, seed of the first run
};

// Runs every (point, seed) pair on up to `threads` threads (0: hardware
// concurrency). The result does not depend on the thread count.
inline SweepResult run_sweep(SweepSpec const& spec, unsigned threads = 0)
{
	if (spec.seeds.empty()) throw InvalidConfig("seeds", "need at least one seed");
	SweepResult out;
	out.fields = varied_fields(spec);
	out.points = sweep_points(spec);
	for (auto const& p : out.points) {
		try {
			out.configs.push_back(apply_overrides(spec.base, p));
		}
		catch (Error const& e) {
			throw Error("sweep point " + p.dump() + ": " + e.what());
		}
	}

	std::size_t const n_seeds = spec.seeds.size();
	std::size_t const jobs = out.points.size() * n_seeds;
	out.runs.resize(jobs);
	std::vector<std::exception_ptr> errors(jobs);

	std::atomic<std::size_t> next{0};
	auto worker = [&] {
		for (std::size_t k; (k = next.fetch_add(1)) < jobs;) {
			std::size_t const point = k / n_seeds;
			SimConfig c = out.configs[point];
			c.seed = spec.seeds[k % n_seeds];
			try {
				out.runs[k] = {point, c.seed, RowMetrics::from(run(c), c)};
			}
			catch (...) {
				errors[k] = std::current_exception();
			}
		}
	};
	if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
	threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(jobs, 1)));
	if (threads <= 1) worker();
	else {
		std::vector<std::thread> pool;
		for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
		for (auto& t : pool) t.join();
	}

	for (std::size_t k = 0; k < jobs; ++k) {
		if (!errors[k]) continue;
		std::string const where = "sweep point " + out.points[k / n_seeds].dump() + " seed "
			+ std::to_string(spec.seeds[k % n_seeds]) + ": ";
		try {
			std::rethrow_exception(errors[k]);
		}
		catch (std::exception const& e) {
			throw Error(where + e.what());
		}
	}

	for (std::size_t p = 0; p < out.points.size(); ++p) {
		std::vector<RowMetrics> rows;
		for (std::size_t s = 0; s < n_seeds; ++s) rows.push_back(out.runs[p * n_seeds + s].metrics);
		auto [mean, sd] = aggregate(rows);
		out.mean.push_back(mean);
		out.stddev.push_back(sd);
	}
	return out;
}

namespace detail {

inline std::string format_number(double v)
{
	if (std::isnan(v)) return "NA";
	char buf[40];
	std::snprintf(buf, sizeof(buf), "%.10g", v);
	return buf;
}

inline std::string format_value(nlohmann::json const& v)
{
	if (v.is_null()) return "";
	if (v.is_string()) return v.get<std::string>();
	if (v.is_number_float()) return format_number(v.get<double>());
	return v.dump();
}

} // namespace detail

struct RangeRow
{
	nlohmann::json group; // values of the varied fields other than chunk_size
	std::optional<SuitableRange> range;
	std::string error;
};

// Suitable range per group of points sharing every varied field except the
// chunk size, computed on the per-point means.
inline std::vector<RangeRow> sweep_ranges(SweepResult const& r, RangeThresholds th = {})
{
	std::vector<RangeRow> out;
	if (std::find(r.fields.begin(), r.fields.end(), "chunk_size") == r.fields.end()) return out;
	std::vector<std::pair<nlohmann::json, std::vector<SweepPoint>>> groups;
	for (std::size_t p = 0; p < r.points.size(); ++p) {
		nlohmann::json key = r.points[p];
		key.erase("chunk_size");
		auto it = std::find_if(groups.begin(), groups.end(), [&](auto const& g) { return g.first == key; });
		if (it == groups.end()) {
			groups.push_back({key, {}});
			it = groups.end() - 1;
		}
		it->second.push_back({r.configs[p].chunk_size, r.mean[p].miss_ratio});
	}
	for (auto& [key, pts] : groups) {
		std::sort(pts.begin(), pts.end(), [](auto const& a, auto const& b) { return a.c < b.c; });
		RangeRow row{key, std::nullopt, {}};
		try {
			row.range = suitable_range(std::span<SweepPoint const>(pts), th);
		}
		catch (RangeNotBracketed const& e) {
			row.error = e.what();
		}
		out.push_back(std::move(row));
	}
	return out;
}

// Columns: row, <varied fields>, metrics..., seed, c_low, c_high. Row kinds:
// run (one per point and seed), mean and stddev (per point), range (per
// group of points differing only in chunk size).
inline std::string to_csv(SweepResult const& r, RangeThresholds th = {})
{
	std::ostringstream out;
	out << "row";
	for (auto const& f : r.fields) out << ',' << f;
	for (auto const* name : RowMetrics::names()) out << ',' << name;
	out << ",seed,c_low,c_high\n";

	auto fields_of = [&](nlohmann::json const& point) {
		std::string s;
		for (auto const& f : r.fields) {
			s += ',';
			if (point.contains(f)) s += detail::format_value(point[f]);
		}
		return s;
	};
	auto metrics_of = [](RowMetrics const& m) {
		std::string s;
		for (double v : m.values()) s += ',' + detail::format_number(v);
		return s;
	};

	std::size_t const n_seeds = r.points.empty() ? 0 : r.runs.size() / r.points.size();
	for (std::size_t p = 0; p < r.points.size(); ++p) {
		std::string const f = fields_of(r.points[p]);
		for (std::size_t s = 0; s < n_seeds; ++s) {
			auto const& row = r.runs[p * n_seeds + s];
			out << "run" << f << metrics_of(row.metrics) << ',' << row.seed << ",,\n";
		}
		out << "mean" << f << metrics_of(r.mean[p]) << ",,,\n";
		out << "stddev" << f << metrics_of(r.stddev[p]) << ",,,\n";
	}
	for (auto const& g : sweep_ranges(r, th)) {
		out << "range" << fields_of(g.group) << std::string(RowMetrics::count, ',') << ',';
		if (g.range)
			out << ',' << detail::format_number(g.range->c_low) << ',' << detail::format_number(g.range->c_high);
		else out << ",NA,NA";
		out << '\n';
	}
	return out.str();
}

// ---------------------------------------------------------------------------
// reading a sweep CSV back (for range extraction)

struct CsvTable
{
	std::vector<std::string> header;
	std::vector<std::vector<std::string>> rows;

	std::ptrdiff_t column(std::string const& name) const
	{
		auto it = std::find(header.begin(), header.end(), name);
		return it == header.end() ? -1 : it - header.begin();
	}
};

inline std::vector<std::string> split_csv_line(std::string const& line)
{
	std::vector<std::string> out;
	std::string cell;
	std::istringstream in(line);
	while (std::getline(in, cell, ',')) out.push_back(cell);
	if (!line.empty() && line.back() == ',') out.emplace_back();
	return out;
}

inline CsvTable read_csv(std::istream& in)
{
	CsvTable t;
	std::string line;
	if (!std::getline(in, line)) throw Error("empty CSV input");
	t.header = split_csv_line(line);
	std::size_t line_no = 1;
	while (std::getline(in, line)) {
		++line_no;
		if (!line.empty() && line.back() == '\r') line.pop_back();
		if (line.empty()) continue;
		auto cells = split_csv_line(line);
		if (cells.size() != t.header.size())
			throw Error("CSV line " + std::to_string(line_no) + ": expected "
				+ std::to_string(t.header.size()) + " cells, got " + std::to_string(cells.size()));
		t.rows.push_back(std::move(cells));
	}
	return t;
}

// Ranges from a sweep CSV: groups the mean rows (run rows when there are no
// mean rows, averaged per point) by every varied column except chunk_size.
inline std::vector<RangeRow> ranges_from_csv(CsvTable const& t, RangeThresholds th = {})
{
	auto const c_col = t.column("chunk_size");
	auto const miss_col = t.column("miss_ratio");
	auto const row_col = t.column("row");
	if (c_col < 0 || miss_col < 0 || row_col < 0)
		throw Error("CSV needs 'row', 'chunk_size' and 'miss_ratio' columns");

	std::vector<std::size_t> group_cols;
	for (std::size_t i = 1; i < static_cast<std::size_t>(miss_col); ++i)
		if (static_cast<std::ptrdiff_t>(i) != c_col) group_cols.push_back(i);

	bool const has_mean = std::any_of(t.rows.begin(), t.rows.end(),
		[&](auto const& r) { return r[static_cast<std::size_t>(row_col)] == "mean"; });
	std::string const wanted = has_mean ? "mean" : "run";

	// group -> c -> (sum, count)
	std::vector<std::pair<nlohmann::json, std::map<double, std::pair<double, int>>>> groups;
	for (auto const& r : t.rows) {
		if (r[static_cast<std::size_t>(row_col)] != wanted) continue;
		nlohmann::json key = nlohmann::json::object();
		for (auto col : group_cols) key[t.header[col]] = r[col];
		double c = 0.0;
		double miss = 0.0;
		try {
			c = std::stod(r[static_cast<std::size_t>(c_col)]);
			miss = std::stod(r[static_cast<std::size_t>(miss_col)]);
		}
		catch (std::exception const&) {
			throw Error("non-numeric chunk_size or miss_ratio in CSV");
		}
		auto it = std::find_if(groups.begin(), groups.end(), [&](auto const& g) { return g.first == key; });
		if (it == groups.end()) {
			groups.push_back({key, {}});
			it = groups.end() - 1;
		}
		auto& acc = it->second[c];
		acc.first += miss;
		acc.second += 1;
	}

	std::vector<RangeRow> out;
	for (auto const& [key, by_c] : groups) {
		std::vector<SweepPoint> pts;
		for (auto const& [c, acc] : by_c) pts.push_back({c, acc.first / acc.second});
		RangeRow row{key, std::nullopt, {}};
		try {
			row.range = suitable_range(std::span<SweepPoint const>(pts), th);
		}
		catch (RangeNotBracketed const& e) {
			row.error = e.what();
		}
		out.push_back(std::move(row));
	}
	return out;
}

} // namespace chunksim
