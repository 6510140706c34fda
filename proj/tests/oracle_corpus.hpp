#pragma once

// The tiny-scenario corpus (n <= 3, ten chunks) shared by the oracle test and
// the acceptance binary, plus helpers to compare engine traces against the
// reference simulator.

#include "reference_sim.hpp"

#include <chunksim/engine.hpp>
#include <chunksim/tracecheck.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace corpus {

using namespace chunksim;

inline std::vector<reference::Line> engine_lines(SimConfig const& c, Overlay const& g,
	RunResult* result = nullptr, std::string* raw = nullptr)
{
	std::stringstream trace;
	RunResult r = Simulator(c, g, &trace).run();
	if (result) *result = r;
	if (raw) *raw = trace.str();
	std::vector<reference::Line> out;
	std::string line;
	std::size_t no = 0;
	while (std::getline(trace, line)) {
		auto t = parse_trace_line(line, ++no);
		out.push_back({t.time, t.kind, t.src, t.dst, t.chunk, t.size});
	}
	return out;
}

// Same-time lines in a fixed order, so that traces that agree up to the order
// of simultaneous events compare equal.
inline void canonical(std::vector<reference::Line>& v)
{
	std::stable_sort(v.begin(), v.end(), [](auto const& a, auto const& b) {
		auto key = [](auto const& l) {
			return std::make_tuple(std::llround(l.time * 1e9), l.kind, l.src, l.dst, l.chunk);
		};
		return key(a) < key(b);
	});
}

// Empty when both event lists agree, else a description of the first
// difference.
inline std::string first_difference(std::vector<reference::Line> a, std::vector<reference::Line> b)
{
	canonical(a);
	canonical(b);
	auto show = [](reference::Line const& l) {
		std::ostringstream s;
		s.precision(17);
		s << l.time << " " << l.kind << " " << l.src << "->" << l.dst << " #" << l.chunk << " " << l.size;
		return s.str();
	};
	for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
		bool const same = a[i].kind == b[i].kind && a[i].src == b[i].src && a[i].dst == b[i].dst
			&& a[i].chunk == b[i].chunk && std::abs(a[i].time - b[i].time) <= 1e-9
			&& std::abs(a[i].size - b[i].size) <= 1e-12;
		if (!same) return "line " + std::to_string(i) + ": " + show(a[i]) + " vs " + show(b[i]);
	}
	if (a.size() != b.size())
		return "lengths differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size());
	return {};
}

inline SimConfig tiny(int n)
{
	SimConfig c;
	c.n = n;
	c.chunk_size = 0.15;
	c.stream_rate = 0.9;
	c.control_msg_size = 0.0008;
	// distinct rates keep peers from forwarding in lockstep, which would
	// produce exact ties whose order depends on rounding
	c.upload_dist = {{{0.93, 0.2}, {0.99, 0.2}, {1.07, 0.2}, {1.16, 0.2}, {1.24, 0.2}}};
	c.source_upload = 1.27;
	c.probe_set_size = 2;
	c.max_parallel_uploads = 2;
	c.warmup_chunks = 2;
	c.measured_chunks = 8;
	return c;
}

struct Topology
{
	char const* name;
	int n;
	std::vector<std::tuple<int, int, double>> edges; // a < b
};

// Largest number of push targets (neighbours other than the source) of a peer.
inline int max_targets(Topology const& t)
{
	std::vector<int> deg(static_cast<std::size_t>(t.n), 0);
	for (auto [a, b, rtt] : t.edges)
		if (b != t.n) {
			++deg[static_cast<std::size_t>(a)];
			++deg[static_cast<std::size_t>(b)];
		}
	return *std::max_element(deg.begin(), deg.end());
}

inline Overlay build(Topology const& t)
{
	Overlay g(t.n);
	for (auto [a, b, rtt] : t.edges) g.add_edge(a, b, rtt);
	return g;
}

inline std::vector<Topology> topologies()
{
	return {
		{"pair", 1, {{0, 1, 0.0731}}},
		{"path", 2, {{0, 1, 0.0537}, {0, 2, 0.0919}}},
		{"triangle", 3, {{0, 1, 0.0613}, {0, 2, 0.0877}, {0, 3, 0.0711}, {1, 2, 0.0459}}},
		{"star", 3, {{0, 1, 0.0613}, {0, 2, 0.0877}, {0, 3, 0.0711}}},
		{"chain", 3, {{0, 1, 0.0823}, {1, 2, 0.0391}, {2, 3, 0.0667}}},
	};
}

struct Scenario
{
	std::string name;
	SimConfig config;
	Overlay overlay;
};

// Every topology under every round mode, scheme and buffer size whose event
// list is fully determined. A blind push with fewer free slots than targets
// picks its recipients at random, so those combinations are left out.
inline std::vector<Scenario> scenarios()
{
	std::vector<Scenario> out;
	for (auto const& topo : topologies())
		for (auto mode : {RoundMode::sequential, RoundMode::continuous, RoundMode::pipelined})
			for (auto scheme : {Scheme::rp_lu, Scheme::rp_lb, Scheme::ba_lu})
				for (int buffer : {10, 4}) {
					if (scheme == Scheme::rp_lb && mode != RoundMode::sequential && max_targets(topo) > 1)
						continue;
					SimConfig c = tiny(topo.n);
					c.round_mode = mode;
					c.scheme = scheme;
					c.buffer_capacity = buffer;
					std::string name = std::string(topo.name) + "/" + std::string(to_string(mode)) + "/"
						+ std::string(to_string(scheme)) + "/B" + std::to_string(buffer);
					out.push_back({std::move(name), c, build(topo)});
				}
	return out;
}

struct Verdict
{
	std::string difference; // empty when the engine matches the reference
	bool missed_match = false;
	TraceCheckResult check;
};

// Runs one scenario through the engine, the reference and the trace checker.
inline Verdict judge(Scenario const& s)
{
	RunResult result;
	std::string raw;
	auto got = engine_lines(s.config, s.overlay, &result, &raw);
	std::vector<double> uploads;
	for (auto const& l : got)
		if (l.kind == "peer") uploads.push_back(l.size);
	reference::Sim ref(s.config, s.overlay, uploads);
	auto want = ref.run();
	Verdict v;
	v.difference = first_difference(got, want);
	v.missed_match = result.report.chunks_missed == ref.missed();
	std::istringstream in(raw);
	v.check = check_trace(in, s.config, &result.report);
	return v;
}

} // namespace corpus
