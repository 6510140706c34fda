#pragma once

// Domain types and configuration shared by every other module.
//
// Units: sizes in Mb, rates in Mb/s, times in seconds, everywhere including
// the config file. Only the latency matrix file and the CLI use milliseconds.

#include <chunksim/errors.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace chunksim {

using PeerId = std::int32_t;
using ChunkIndex = std::int64_t;

inline constexpr ChunkIndex no_chunk = -1;

enum class Scheme { rp_lb, rp_lu, ba_lu };

// How a peer interleaves probing and serving.
//  sequential: probe, wait for the replies, send, wait for the sends to
//              finish, repeat.
//  continuous: probe cycles run back to back; a free upload slot is filled
//              from the most recent complete set of replies.
//  pipelined:  like continuous, but once every slot is busy and the last
//              replies hold a useful chunk, probing pauses until a slot frees.
enum class RoundMode { sequential, continuous, pipelined };

inline std::string_view to_string(Scheme s)
{
	switch (s) {
		case Scheme::rp_lb: return "rp_lb";
		case Scheme::rp_lu: return "rp_lu";
		case Scheme::ba_lu: return "ba_lu";
	}
	return "?";
}

inline std::string_view to_string(RoundMode m)
{
	switch (m) {
		case RoundMode::sequential: return "sequential";
		case RoundMode::continuous: return "continuous";
		case RoundMode::pipelined: return "pipelined";
	}
	return "?";
}

inline Scheme parse_scheme(std::string_view s)
{
	if (s == "rp_lb") return Scheme::rp_lb;
	if (s == "rp_lu") return Scheme::rp_lu;
	if (s == "ba_lu") return Scheme::ba_lu;
	throw InvalidConfig("scheme", "unknown scheme '" + std::string(s) + "'");
}

inline RoundMode parse_round_mode(std::string_view s)
{
	if (s == "sequential") return RoundMode::sequential;
	if (s == "continuous") return RoundMode::continuous;
	if (s == "pipelined") return RoundMode::pipelined;
	throw InvalidConfig("round_mode", "unknown round mode '" + std::string(s) + "'");
}

inline bool uses_buffer_maps(Scheme s) { return s != Scheme::rp_lb; }

struct BandwidthClass
{
	double rate;        // Mb/s
	double probability;

	bool operator==(BandwidthClass const&) const = default;
};

// Discrete distribution of peer upload bandwidths. A homogeneous population
// is a single class with probability 1.
struct BandwidthDist
{
	std::vector<BandwidthClass> classes;

	static BandwidthDist homogeneous(double rate) { return {{{rate, 1.0}}}; }

	// Placeholder three-class population. Not measured data: it only gives
	// the bandwidth-aware scheme something to differ on.
	static BandwidthDist heterogeneous_preset()
	{
		return {{{0.5, 0.4}, {1.03, 0.4}, {4.0, 0.2}}};
	}

	bool is_homogeneous() const { return classes.size() == 1; }

	double mean() const
	{
		double m = 0.0;
		for (auto const& c : classes) m += c.rate * c.probability;
		return m;
	}

	bool operator==(BandwidthDist const&) const = default;
};

struct ConstantLatency
{
	double rtt; // seconds
	bool operator==(ConstantLatency const&) const = default;
};

// "i j rtt_ms" triples; entries are sampled uniformly and multiplied by scale.
struct MatrixLatency
{
	std::string path;
	double scale = 1.0;
	bool operator==(MatrixLatency const&) const = default;
};

struct LognormalLatency
{
	double median; // seconds
	double sigma;
	bool operator==(LognormalLatency const&) const = default;
};

using LatencyModel = std::variant<ConstantLatency, MatrixLatency, LognormalLatency>;

struct SimConfig
{
	int n = 1000;                      // non-source peers
	double edge_prob = 0.05;
	double stream_rate = 0.9;          // s
	double chunk_size = 0.15;          // c
	double control_msg_size = 0.0008;  // c_c: a 300-bit map plus headers
	int probe_set_size = 1;            // m
	int max_parallel_uploads = 1;      // m'
	BandwidthDist upload_dist = BandwidthDist::homogeneous(1.03);
	double source_upload = 1.03;       // u_s
	int buffer_capacity = 300;         // B, in chunks
	LatencyModel latency = ConstantLatency{0.08};
	double latency_scale = 1.0;        // applied on top of any latency model
	Scheme scheme = Scheme::rp_lu;
	RoundMode round_mode = RoundMode::continuous;
	int warmup_chunks = 200;
	int measured_chunks = 500;
	std::uint64_t seed = 1;

	// seconds between two consecutive chunks
	double chunk_interval() const { return chunk_size / stream_rate; }
	double creation_time(ChunkIndex index) const
	{
		return static_cast<double>(index) * chunk_size / stream_rate;
	}
	// a chunk is useful until B newer chunks exist
	double horizon(ChunkIndex index) const
	{
		return creation_time(index + buffer_capacity);
	}
	ChunkIndex first_measured() const { return warmup_chunks; }
	ChunkIndex end_measured() const { return ChunkIndex(warmup_chunks) + measured_chunks; }

	bool operator==(SimConfig const&) const = default;
};

struct MetricsReport
{
	double miss_ratio = 0.0;
	double avg_delay = 0.0;           // seconds, over in-time deliveries
	double goodput = 0.0;             // Mb/s per peer
	double throughput = 0.0;          // Mb/s per peer, everything sent
	double overhead = 0.0;            // throughput - goodput
	double control_rate = 0.0;        // Mb/s per peer spent on probes and replies
	double duplicate_data_rate = 0.0; // Mb/s per peer of useless data
	std::vector<double> peer_mean_delay;
	std::int64_t chunks_eligible = 0;
	std::int64_t chunks_missed = 0;
	std::int64_t late_deliveries = 0;
	std::int64_t duplicate_deliveries = 0;

	bool operator==(MetricsReport const&) const = default;
};

// ---------------------------------------------------------------------------
// validation

inline SimConfig validate(SimConfig config)
{
	auto require = [](bool ok, char const* field, char const* reason) {
		if (!ok) throw InvalidConfig(field, reason);
	};
	auto positive = [&](double v, char const* field) {
		require(std::isfinite(v) && v > 0.0, field, "must be a positive number");
	};

	require(config.n >= 1, "n", "need at least one peer");
	require(config.edge_prob >= 0.0 && config.edge_prob <= 1.0, "edge_prob",
		"probability must lie in [0, 1]");
	positive(config.stream_rate, "stream_rate");
	positive(config.chunk_size, "chunk_size");
	require(std::isfinite(config.control_msg_size) && config.control_msg_size >= 0.0,
		"control_msg_size", "must be a non-negative number");
	require(config.probe_set_size >= 1, "probe_set_size", "must be >= 1");
	require(config.max_parallel_uploads >= 1, "max_parallel_uploads", "must be >= 1");
	positive(config.source_upload, "source_upload");
	require(config.buffer_capacity >= 1, "buffer_capacity", "must be >= 1");
	require(config.warmup_chunks >= 0, "warmup_chunks", "must be >= 0");
	require(config.measured_chunks >= 1, "measured_chunks", "must be >= 1");
	require(std::isfinite(config.latency_scale) && config.latency_scale >= 0.0,
		"latency_scale", "must be a non-negative number");

	require(!config.upload_dist.classes.empty(), "upload_dist", "no bandwidth classes");
	double total = 0.0;
	for (auto const& c : config.upload_dist.classes) {
		positive(c.rate, "upload_dist");
		require(c.probability >= 0.0 && c.probability <= 1.0, "upload_dist",
			"class probability outside [0, 1]");
		total += c.probability;
	}
	require(std::abs(total - 1.0) <= 1e-9, "upload_dist", "probabilities must sum to 1");

	std::visit([&](auto const& m) {
		using T = std::decay_t<decltype(m)>;
		if constexpr (std::is_same_v<T, ConstantLatency>)
			require(std::isfinite(m.rtt) && m.rtt >= 0.0, "latency", "rtt must be >= 0");
		else if constexpr (std::is_same_v<T, MatrixLatency>) {
			require(!m.path.empty(), "latency", "matrix path is empty");
			positive(m.scale, "latency");
		}
		else {
			positive(m.median, "latency");
			require(std::isfinite(m.sigma) && m.sigma >= 0.0, "latency", "sigma must be >= 0");
		}
	}, config.latency);

	return config;
}

// ---------------------------------------------------------------------------
// command-line latency spec (milliseconds):
//   constant:<rtt_ms> | matrix:<path>:<scale> | lognormal:<median_ms>:<sigma>

inline LatencyModel parse_latency_spec(std::string const& spec)
{
	auto bad = [&](char const* why) { return InvalidConfig("latency", "'" + spec + "': " + why); };
	auto number = [&](std::string const& text) {
		std::size_t used = 0;
		double v = 0.0;
		try {
			v = std::stod(text, &used);
		}
		catch (std::exception const&) {
			throw bad("not a number");
		}
		if (used != text.size()) throw bad("not a number");
		return v;
	};
	auto colon = spec.find(':');
	if (colon == std::string::npos) throw bad("expected <model>:<parameters>");
	std::string const model = spec.substr(0, colon);
	std::string const rest = spec.substr(colon + 1);
	if (model == "constant") return ConstantLatency{number(rest) * 1e-3};
	auto last = rest.rfind(':');
	if (last == std::string::npos) throw bad("expected two parameters");
	if (model == "matrix") return MatrixLatency{rest.substr(0, last), number(rest.substr(last + 1))};
	if (model == "lognormal")
		return LognormalLatency{number(rest.substr(0, last)) * 1e-3, number(rest.substr(last + 1))};
	throw bad("unknown latency model");
}

// ---------------------------------------------------------------------------
// config file (JSON)

namespace detail {

inline nlohmann::json latency_to_json(LatencyModel const& model)
{
	return std::visit([](auto const& m) -> nlohmann::json {
		using T = std::decay_t<decltype(m)>;
		if constexpr (std::is_same_v<T, ConstantLatency>)
			return {{"model", "constant"}, {"rtt", m.rtt}};
		else if constexpr (std::is_same_v<T, MatrixLatency>)
			return {{"model", "matrix"}, {"path", m.path}, {"scale", m.scale}};
		else
			return {{"model", "lognormal"}, {"median", m.median}, {"sigma", m.sigma}};
	}, model);
}

inline void check_keys(nlohmann::json const& j, std::set<std::string> const& allowed,
	std::string const& where)
{
	if (!j.is_object()) throw InvalidConfig(where, "expected an object");
	for (auto const& [key, value] : j.items())
		if (!allowed.contains(key))
			throw InvalidConfig(where.empty() ? key : where + "." + key, "unknown key");
}

template <typename T>
T get_field(nlohmann::json const& j, char const* key, T fallback, std::string const& field)
{
	auto it = j.find(key);
	if (it == j.end()) return fallback;
	try {
		return it->get<T>();
	}
	catch (nlohmann::json::exception const&) {
		throw InvalidConfig(field, "wrong value type");
	}
}

inline LatencyModel latency_from_json(nlohmann::json const& j)
{
	if (!j.is_object() || !j.contains("model"))
		throw InvalidConfig("latency", "expected an object with a 'model' key");
	auto const model = get_field<std::string>(j, "model", "", "latency.model");
	if (model == "constant") {
		check_keys(j, {"model", "rtt"}, "latency");
		return ConstantLatency{get_field<double>(j, "rtt", 0.08, "latency.rtt")};
	}
	if (model == "matrix") {
		check_keys(j, {"model", "path", "scale"}, "latency");
		return MatrixLatency{get_field<std::string>(j, "path", "", "latency.path"),
			get_field<double>(j, "scale", 1.0, "latency.scale")};
	}
	if (model == "lognormal") {
		check_keys(j, {"model", "median", "sigma"}, "latency");
		return LognormalLatency{get_field<double>(j, "median", 0.08, "latency.median"),
			get_field<double>(j, "sigma", 0.5, "latency.sigma")};
	}
	throw InvalidConfig("latency.model", "unknown latency model '" + model + "'");
}

inline BandwidthDist bandwidth_from_json(nlohmann::json const& j)
{
	check_keys(j, {"homogeneous", "discrete"}, "upload_dist");
	if (j.size() != 1)
		throw InvalidConfig("upload_dist", "need exactly one of 'homogeneous' or 'discrete'");
	if (j.contains("homogeneous"))
		return BandwidthDist::homogeneous(get_field<double>(j, "homogeneous", 0.0, "upload_dist"));
	BandwidthDist dist;
	auto const& list = j.at("discrete");
	if (!list.is_array()) throw InvalidConfig("upload_dist", "discrete must be a list");
	for (auto const& entry : list) {
		if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() || !entry[1].is_number())
			throw InvalidConfig("upload_dist", "entries must be [rate, probability] pairs");
		dist.classes.push_back({entry[0].get<double>(), entry[1].get<double>()});
	}
	return dist;
}

} // namespace detail

inline std::set<std::string> const& config_keys()
{
	static std::set<std::string> const keys = {"n", "edge_prob", "stream_rate",
		"chunk_size", "control_msg_size", "probe_set_size", "max_parallel_uploads",
		"upload_dist", "source_upload", "buffer_capacity", "latency", "latency_scale",
		"scheme", "round_mode", "warmup_chunks", "measured_chunks", "seed"};
	return keys;
}

inline nlohmann::json to_json(SimConfig const& c)
{
	nlohmann::json dist;
	if (c.upload_dist.is_homogeneous())
		dist["homogeneous"] = c.upload_dist.classes.front().rate;
	else {
		dist["discrete"] = nlohmann::json::array();
		for (auto const& cls : c.upload_dist.classes)
			dist["discrete"].push_back({cls.rate, cls.probability});
	}
	return {
		{"n", c.n},
		{"edge_prob", c.edge_prob},
		{"stream_rate", c.stream_rate},
		{"chunk_size", c.chunk_size},
		{"control_msg_size", c.control_msg_size},
		{"probe_set_size", c.probe_set_size},
		{"max_parallel_uploads", c.max_parallel_uploads},
		{"upload_dist", dist},
		{"source_upload", c.source_upload},
		{"buffer_capacity", c.buffer_capacity},
		{"latency", detail::latency_to_json(c.latency)},
		{"latency_scale", c.latency_scale},
		{"scheme", std::string(to_string(c.scheme))},
		{"round_mode", std::string(to_string(c.round_mode))},
		{"warmup_chunks", c.warmup_chunks},
		{"measured_chunks", c.measured_chunks},
		{"seed", c.seed},
	};
}

// Absent keys take their defaults; unknown keys are rejected. The result is
// validated.
inline SimConfig config_from_json(nlohmann::json const& j)
{
	detail::check_keys(j, config_keys(), "");
	SimConfig d;
	SimConfig c;
	using detail::get_field;
	c.n = get_field(j, "n", d.n, "n");
	c.edge_prob = get_field(j, "edge_prob", d.edge_prob, "edge_prob");
	c.stream_rate = get_field(j, "stream_rate", d.stream_rate, "stream_rate");
	c.chunk_size = get_field(j, "chunk_size", d.chunk_size, "chunk_size");
	c.control_msg_size = get_field(j, "control_msg_size", d.control_msg_size, "control_msg_size");
	c.probe_set_size = get_field(j, "probe_set_size", d.probe_set_size, "probe_set_size");
	c.max_parallel_uploads = get_field(j, "max_parallel_uploads", d.max_parallel_uploads,
		"max_parallel_uploads");
	if (j.contains("upload_dist")) c.upload_dist = detail::bandwidth_from_json(j["upload_dist"]);
	c.source_upload = get_field(j, "source_upload", d.source_upload, "source_upload");
	c.buffer_capacity = get_field(j, "buffer_capacity", d.buffer_capacity, "buffer_capacity");
	if (j.contains("latency")) c.latency = detail::latency_from_json(j["latency"]);
	c.latency_scale = get_field(j, "latency_scale", d.latency_scale, "latency_scale");
	if (j.contains("scheme"))
		c.scheme = parse_scheme(get_field<std::string>(j, "scheme", "", "scheme"));
	if (j.contains("round_mode"))
		c.round_mode = parse_round_mode(get_field<std::string>(j, "round_mode", "", "round_mode"));
	c.warmup_chunks = get_field(j, "warmup_chunks", d.warmup_chunks, "warmup_chunks");
	c.measured_chunks = get_field(j, "measured_chunks", d.measured_chunks, "measured_chunks");
	c.seed = get_field(j, "seed", d.seed, "seed");
	return validate(c);
}

inline SimConfig parse_config(std::string const& text)
{
	nlohmann::json j;
	try {
		j = nlohmann::json::parse(text);
	}
	catch (nlohmann::json::parse_error const& e) {
		throw InvalidConfig("<document>", e.what());
	}
	return config_from_json(j);
}

inline SimConfig load_config(std::string const& path)
{
	std::ifstream in(path);
	if (!in) throw InvalidConfig("<file>", "cannot open '" + path + "'");
	std::stringstream buf;
	buf << in.rdbuf();
	return parse_config(buf.str());
}

inline std::string dump_config(SimConfig const& c)
{
	return to_json(c).dump(2) + "\n";
}

} // namespace chunksim
