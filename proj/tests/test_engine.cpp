#include <chunksim/engine.hpp>
#include <chunksim/tracecheck.hpp>

#include <doctest.h>

#include <sstream>
#include <string>

using namespace chunksim;

namespace {

SimConfig small(int n = 60)
{
	SimConfig c;
	c.n = n;
	c.edge_prob = 0.15;
	c.warmup_chunks = 20;
	c.measured_chunks = 60;
	c.seed = 4;
	return c;
}

std::string trace_of(SimConfig const& c)
{
	std::ostringstream out;
	run(c, &out);
	return out.str();
}

} // namespace

TEST_CASE("processor sharing splits the link evenly")
{
	UploadLink link(1.0);
	link.add(0.0, 1, 1.0);
	link.add(0.0, 2, 2.0);
	CHECK(link.rate_each() == 0.5);
	CHECK(transfer_arrival_time(link, 1, 0.0, 0.0) == doctest::Approx(2.0));
	CHECK(transfer_arrival_time(link, 2, 0.0, 0.0) == doctest::Approx(3.0));
	CHECK(transfer_arrival_time(link, 2, 0.0, 0.2) == doctest::Approx(3.1));

	auto next = link.reschedule(0.0);
	REQUIRE(next);
	CHECK(*next == doctest::Approx(2.0));
	CHECK(link.complete(2.0) == std::vector<MessageId>{1});
	CHECK(link.rate_each() == 1.0);
	next = link.reschedule(2.0);
	REQUIRE(next);
	CHECK(*next == doctest::Approx(3.0));
	CHECK(link.complete(3.0) == std::vector<MessageId>{2});
	CHECK(!link.busy());
	CHECK(!link.reschedule(3.0));
}

TEST_CASE("a transmission joining midway slows the others")
{
	UploadLink link(2.0);
	link.add(0.0, 1, 2.0); // alone: would finish at 1
	link.add(0.5, 2, 1.0); // 1 Mb left on the first, both now at rate 1
	CHECK(*link.reschedule(0.5) == doctest::Approx(1.5));
	auto done = link.complete(1.5);
	CHECK(done == std::vector<MessageId>{1, 2});
}

TEST_CASE("fixed rate transfer time")
{
	CHECK(transfer_arrival_time(0.15, 1.03, 0.08) == doctest::Approx(0.15 / 1.03 + 0.04));
}

TEST_CASE("event queue orders by time then insertion")
{
	EventQueue q;
	q.push(2.0, EventKind::RoundStart, 0, 1);
	q.push(1.0, EventKind::ChunkCreated, 1, 2);
	q.push(2.0, EventKind::ProbeArrived, 2, 3);
	q.push(1.0, EventKind::ReplyTimeout, 3, 4);
	std::vector<std::uint64_t> tags;
	while (!q.empty()) tags.push_back(q.pop().tag);
	CHECK(tags == std::vector<std::uint64_t>{2, 4, 1, 3});
}

TEST_CASE("runs are reproducible byte for byte")
{
	for (auto mode : {RoundMode::sequential, RoundMode::continuous, RoundMode::pipelined}) {
		SimConfig c = small();
		c.round_mode = mode;
		c.upload_dist = BandwidthDist::heterogeneous_preset();
		auto a = trace_of(c);
		CHECK(!a.empty());
		CHECK(a == trace_of(c));
		c.seed = 5;
		CHECK(a != trace_of(c));
	}
}

TEST_CASE("report invariants")
{
	for (auto scheme : {Scheme::rp_lu, Scheme::rp_lb, Scheme::ba_lu})
		for (int m : {1, 3}) {
			SimConfig c = small();
			c.scheme = scheme;
			c.probe_set_size = m;
			c.max_parallel_uploads = m;
			CAPTURE(to_string(scheme));
			CAPTURE(m);
			auto r = run(c);
			auto const& rep = r.report;
			CHECK(rep.miss_ratio >= 0.0);
			CHECK(rep.miss_ratio <= 1.0);
			CHECK(rep.chunks_eligible == 60 * 60);
			// span is M * c / s, so goodput is exactly s * (1 - miss)
			CHECK(rep.goodput == doctest::Approx(c.stream_rate * (1.0 - rep.miss_ratio)));
			CHECK(rep.throughput >= rep.goodput);
			CHECK(rep.overhead == doctest::Approx(rep.throughput - rep.goodput));
			CHECK(rep.avg_delay > 0.0);
			CHECK(rep.avg_delay < c.horizon(0));
			if (!uses_buffer_maps(scheme)) CHECK(rep.control_rate == 0.0);
			else CHECK(rep.control_rate > 0.0);
			CHECK(r.median_rtt == doctest::Approx(0.08));
		}
}

TEST_CASE("a single peer next to the source receives the whole stream")
{
	SimConfig c;
	c.n = 1;
	c.warmup_chunks = 5;
	c.measured_chunks = 50;
	c.source_upload = 2.0;
	Overlay g(1);
	g.add_edge(0, 1, 0.08);
	for (auto mode : {RoundMode::continuous, RoundMode::pipelined}) {
		c.round_mode = mode;
		auto r = Simulator(c, g).run();
		CHECK(r.report.miss_ratio == 0.0);
		CHECK(r.report.duplicate_deliveries == 0);
	}
}

TEST_CASE("two nodes at u_s = 1.03 over a 100 ms link")
{
	SimConfig c;
	c.n = 1;
	c.warmup_chunks = 20;
	c.measured_chunks = 200;
	Overlay g(1);
	g.add_edge(0, 1, 0.1);
	// replies from the previous cycle are on hand when a chunk appears, so a
	// chunk waits only for its own transmission and half the RTT
	double const floor = 0.15 / 1.03 + 0.05;
	auto r = Simulator(c, g).run().report;
	CHECK(r.miss_ratio == 0.0);
	CHECK(r.avg_delay >= floor - 1e-9);
	CHECK(r.avg_delay < floor + 0.01);

	// one probe cycle per push: the source's cycle outlasts the chunk interval
	c.round_mode = RoundMode::sequential;
	double const cycle = 2 * (0.0008 / 1.03 + 0.05) + 0.15 / 1.03;
	CHECK(cycle > c.chunk_interval());
	r = Simulator(c, g).run().report;
	CHECK(r.miss_ratio == doctest::Approx(1.0 - c.chunk_interval() / cycle).epsilon(0.05));
}

TEST_CASE("engine traces pass the checker")
{
	for (auto mode : {RoundMode::sequential, RoundMode::continuous, RoundMode::pipelined})
		for (auto scheme : {Scheme::rp_lu, Scheme::rp_lb, Scheme::ba_lu}) {
			SimConfig c = small(40);
			c.round_mode = mode;
			c.scheme = scheme;
			c.buffer_capacity = 30;
			c.probe_set_size = 3;
			c.max_parallel_uploads = 2;
			c.upload_dist = BandwidthDist::heterogeneous_preset();
			std::stringstream trace;
			auto r = run(c, &trace);
			auto result = check_trace(trace, c, &r.report);
			CAPTURE(to_string(mode));
			CAPTURE(to_string(scheme));
			for (auto const& v : result.violations) INFO(to_string(v.rule) << ": " << v.description);
			CHECK(result.ok());
		}
}

TEST_CASE("overlay size must match")
{
	SimConfig c = small(10);
	CHECK_THROWS_AS(Simulator(c, Overlay(9)), ConfigUnsatisfiable);
}
