// The checker against clean engine traces and against traces with one fault
// injected by hand.

#include <chunksim/engine.hpp>
#include <chunksim/tracecheck.hpp>

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

using namespace chunksim;

namespace {

SimConfig config()
{
	SimConfig c;
	c.n = 30;
	c.edge_prob = 0.2;
	c.buffer_capacity = 20;
	c.warmup_chunks = 10;
	c.measured_chunks = 40;
	c.probe_set_size = 2;
	c.max_parallel_uploads = 2;
	c.seed = 12;
	return c;
}

struct Traced
{
	std::vector<TraceLine> lines;
	MetricsReport report;
};

Traced traced(SimConfig const& c)
{
	std::stringstream out;
	Traced t;
	t.report = run(c, &out).report;
	std::string line;
	std::size_t no = 0;
	while (std::getline(out, line)) t.lines.push_back(parse_trace_line(line, ++no));
	return t;
}

std::string format(TraceLine const& l)
{
	char buf[200];
	std::snprintf(buf, sizeof(buf), "%.17g\t%s\t%lld\t%lld\t%lld\t%.17g", l.time, l.kind.c_str(), l.src, l.dst,
		l.chunk, l.size);
	return buf;
}

TraceCheckResult check(std::vector<TraceLine> lines, SimConfig const& c, MetricsReport const* r = nullptr)
{
	std::stable_sort(lines.begin(), lines.end(), [](auto const& a, auto const& b) { return a.time < b.time; });
	std::stringstream in;
	for (auto const& l : lines) in << format(l) << '\n';
	return check_trace(in, c, r);
}

bool has(TraceCheckResult const& r, Rule rule)
{
	return std::any_of(r.violations.begin(), r.violations.end(), [&](auto const& v) { return v.rule == rule; });
}

std::size_t first(std::vector<TraceLine> const& lines, std::string const& kind, std::size_t from = 0)
{
	for (std::size_t i = from; i < lines.size(); ++i)
		if (lines[i].kind == kind) return i;
	FAIL("no '" << kind << "' line");
	return 0;
}

} // namespace

TEST_CASE("clean traces pass, with the report reconciled")
{
	for (auto mode : {RoundMode::sequential, RoundMode::continuous, RoundMode::pipelined})
		for (auto scheme : {Scheme::rp_lu, Scheme::rp_lb, Scheme::ba_lu}) {
			SimConfig c = config();
			c.round_mode = mode;
			c.scheme = scheme;
			auto t = traced(c);
			auto r = check(t.lines, c, &t.report);
			CAPTURE(to_string(mode));
			CAPTURE(to_string(scheme));
			for (auto const& v : r.violations) INFO(to_string(v.rule) << ": " << v.description);
			CHECK(r.ok());
			CHECK(r.lines == t.lines.size());
			CHECK(r.in_time_deliveries == t.report.chunks_eligible - t.report.chunks_missed);
		}
}

TEST_CASE("an early arrival breaks causality")
{
	SimConfig c = config();
	auto t = traced(c);
	auto i = first(t.lines, "recv_data");
	t.lines[i].time -= 0.001;
	auto r = check(t.lines, c);
	CHECK(has(r, Rule::causality));
	CHECK(r.total == 1);
}

TEST_CASE("sending a chunk not yet held is detected")
{
	SimConfig c = config();
	auto t = traced(c);
	// right after chunk 20 is created, peer 0 pretends to push it
	auto created = first(t.lines, "create");
	while (t.lines[created].chunk != 20) created = first(t.lines, "create", created + 1);
	auto link = first(t.lines, "link");
	while (t.lines[link].src != 0 && t.lines[link].dst != 0) link = first(t.lines, "link", link + 1);
	long long const neighbour = t.lines[link].src == 0 ? t.lines[link].dst : t.lines[link].src;
	TraceLine fake{t.lines[created].time, "send_data", 0, neighbour, 20, c.chunk_size};
	t.lines.insert(t.lines.begin() + static_cast<std::ptrdiff_t>(created) + 1, fake);
	CHECK(has(check(t.lines, c), Rule::send_before_own));
}

TEST_CASE("a late completion breaks processor sharing")
{
	SimConfig c = config();
	auto t = traced(c);
	auto i = first(t.lines, "done_data");
	t.lines[i].time += 0.002;
	CHECK(has(check(t.lines, c), Rule::sharing));

	// the same trace read with a faster peer
	auto u = traced(c);
	auto p = first(u.lines, "peer");
	u.lines[p].size *= 1.5;
	CHECK(has(check(u.lines, c), Rule::sharing));
}

TEST_CASE("a spurious eviction breaks the buffer rule")
{
	// expiry keeps every buffer within the newest B chunks, so an engine trace
	// never overflows; an eviction line without an overflow is a fault
	SimConfig c = config();
	auto t = traced(c);
	CHECK(std::none_of(t.lines.begin(), t.lines.end(), [](auto const& l) { return l.kind == "evict"; }));
	auto i = first(t.lines, "recv_data", first(t.lines, "recv_data") + 50);
	TraceLine evict{t.lines[i].time, "evict", t.lines[i].dst, -1, t.lines[i].chunk, c.chunk_size};
	t.lines.insert(t.lines.begin() + static_cast<std::ptrdiff_t>(i) + 1, evict);
	CHECK(has(check(t.lines, c), Rule::buffer));
}

TEST_CASE("report and size mismatches break conservation")
{
	SimConfig c = config();
	auto t = traced(c);
	auto report = t.report;
	report.chunks_missed += 1;
	CHECK(has(check(t.lines, c, &report), Rule::conservation));
	report = t.report;
	report.control_rate *= 1.01;
	CHECK(has(check(t.lines, c, &report), Rule::conservation));
	report = t.report;
	report.goodput *= 0.99;
	CHECK(has(check(t.lines, c, &report), Rule::conservation));

	auto i = first(t.lines, "send_probe");
	t.lines[i].size *= 2;
	CHECK(has(check(t.lines, c), Rule::conservation));
}

TEST_CASE("malformed traces are rejected")
{
	SimConfig c = config();
	auto bad = [&](std::string const& text) {
		std::istringstream in(text);
		return check_trace(in, c);
	};
	CHECK_THROWS_AS(bad("0\tcreate\t30\t-1\t0\n"), MalformedTrace);
	CHECK_THROWS_AS(bad("0\tcreate\t30\t-1\tx\t0.15\n"), MalformedTrace);
	CHECK_THROWS_AS(bad("0\tteleport\t30\t-1\t0\t0.15\n"), MalformedTrace);
	CHECK_THROWS_AS(bad("1\tpeer\t0\t-1\t-1\t1\n0\tpeer\t1\t-1\t-1\t1\n"), MalformedTrace);
	CHECK_THROWS_AS(bad("-1\tpeer\t0\t-1\t-1\t1\n"), MalformedTrace);
	try {
		bad("0\tpeer\t0\t-1\t-1\t1\n0\tpeer\n");
		FAIL("expected MalformedTrace");
	}
	catch (MalformedTrace const& e) {
		CHECK(std::string(e.what()).find("2") != std::string::npos);
	}
}
