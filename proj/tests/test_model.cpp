#include <chunksim/chunk_set.hpp>
#include <chunksim/model.hpp>
#include <chunksim/rng.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

using namespace chunksim;

TEST_CASE("defaults validate and derive the chunk clock")
{
	SimConfig c;
	CHECK_NOTHROW(validate(c));
	CHECK(c.chunk_interval() == doctest::Approx(0.15 / 0.9));
	CHECK(c.creation_time(6) == doctest::Approx(1.0));
	CHECK(c.horizon(0) == doctest::Approx(300 * 0.15 / 0.9));
	CHECK(c.first_measured() == 200);
	CHECK(c.end_measured() == 700);
}

TEST_CASE("invalid fields are named")
{
	auto field_of = [](SimConfig c) -> std::string {
		try {
			validate(c);
		}
		catch (InvalidConfig const& e) {
			return e.field;
		}
		return "";
	};
	SimConfig c;
	c.n = 0;
	CHECK(field_of(c) == "n");
	c = {};
	c.edge_prob = 1.5;
	CHECK(field_of(c) == "edge_prob");
	c = {};
	c.stream_rate = 0.0;
	CHECK(field_of(c) == "stream_rate");
	c = {};
	c.probe_set_size = 0;
	CHECK(field_of(c) == "probe_set_size");
	c = {};
	c.upload_dist = {{{1.0, 0.5}, {2.0, 0.4}}};
	CHECK(field_of(c) == "upload_dist");
	c = {};
	c.latency = ConstantLatency{-0.01};
	CHECK(field_of(c) == "latency");
	c = {};
	c.control_msg_size = -1.0;
	CHECK(field_of(c) == "control_msg_size");
	c = {};
	c.measured_chunks = 0;
	CHECK(field_of(c) == "measured_chunks");
}

TEST_CASE("config JSON round-trips")
{
	std::vector<SimConfig> configs(4);
	configs[1].upload_dist = BandwidthDist::heterogeneous_preset();
	configs[1].scheme = Scheme::ba_lu;
	configs[1].round_mode = RoundMode::sequential;
	configs[2].latency = LognormalLatency{0.07, 0.6};
	configs[2].seed = 123456789012345ULL;
	configs[3].latency = MatrixLatency{"rtt.txt", 1.5};
	configs[3].latency_scale = 2.0;
	configs[3].chunk_size = 0.035;
	for (auto const& c : configs) CHECK(parse_config(dump_config(c)) == c);
}

TEST_CASE("config parsing rejects unknown keys and bad types")
{
	CHECK_THROWS_AS(parse_config(R"({"chunk_sise": 0.1})"), InvalidConfig);
	CHECK_THROWS_AS(parse_config(R"({"n": "many"})"), InvalidConfig);
	CHECK_THROWS_AS(parse_config(R"({"scheme": "rp_xx"})"), InvalidConfig);
	CHECK_THROWS_AS(parse_config(R"({"latency": {"model": "constant", "rt": 1}})"), InvalidConfig);
	CHECK_THROWS_AS(parse_config("{"), InvalidConfig);
	auto c = parse_config(R"({"chunk_size": 0.4, "upload_dist": {"discrete": [[0.5, 0.5], [2, 0.5]]}})");
	CHECK(c.chunk_size == 0.4);
	CHECK(c.upload_dist.mean() == doctest::Approx(1.25));
	CHECK(c.n == SimConfig{}.n);
}

TEST_CASE("latency specs are read in milliseconds")
{
	auto c = std::get<ConstantLatency>(parse_latency_spec("constant:80"));
	CHECK(c.rtt == doctest::Approx(0.08));
	auto m = std::get<MatrixLatency>(parse_latency_spec("matrix:/tmp/a:b.txt:2.5"));
	CHECK(m.path == "/tmp/a:b.txt");
	CHECK(m.scale == 2.5);
	auto l = std::get<LognormalLatency>(parse_latency_spec("lognormal:60:0.4"));
	CHECK(l.median == doctest::Approx(0.06));
	CHECK(l.sigma == doctest::Approx(0.4));
	CHECK_THROWS_AS(parse_latency_spec("constant"), InvalidConfig);
	CHECK_THROWS_AS(parse_latency_spec("constant:8x"), InvalidConfig);
	CHECK_THROWS_AS(parse_latency_spec("gamma:1:2"), InvalidConfig);
	CHECK_THROWS_AS(parse_latency_spec("lognormal:60"), InvalidConfig);
}

TEST_CASE("rng streams are reproducible and separated")
{
	Rng a(42, "peer", 3);
	Rng b(42, "peer", 3);
	Rng other(42, "peer", 4);
	int same = 0;
	for (int i = 0; i < 100; ++i) {
		auto x = a.uniform();
		CHECK(x == b.uniform());
		same += x == other.uniform();
		CHECK(x >= 0.0);
		CHECK(x < 1.0);
	}
	CHECK(same == 0);
	CHECK(substream_seed(1, "graph", 0) != substream_seed(1, "graph", 1));
	CHECK(substream_seed(1, "graph", 0) != substream_seed(2, "graph", 0));
}

TEST_CASE("rng distributions")
{
	Rng r(7);
	std::vector<int> counts(6, 0);
	int const draws = 60000;
	for (int i = 0; i < draws; ++i) {
		auto k = r.below(6);
		REQUIRE(k < 6);
		++counts[static_cast<std::size_t>(k)];
	}
	double chi2 = 0.0;
	for (int k : counts) chi2 += (k - draws / 6.0) * (k - draws / 6.0) / (draws / 6.0);
	CHECK(chi2 < 20.5); // 5 dof, p = 0.001

	double sum = 0.0;
	double sq = 0.0;
	int const n = 50000;
	for (int i = 0; i < n; ++i) {
		double x = r.normal();
		sum += x;
		sq += x * x;
	}
	CHECK(std::abs(sum / n) < 0.02);
	CHECK(std::abs(sq / n - 1.0) < 0.03);

	std::vector<double> ln;
	for (int i = 0; i < 20001; ++i) ln.push_back(r.lognormal(0.08, 0.5));
	std::nth_element(ln.begin(), ln.begin() + 10000, ln.end());
	CHECK(ln[10000] == doctest::Approx(0.08).epsilon(0.03));
	CHECK(*std::min_element(ln.begin(), ln.end()) > 0.0);
}

TEST_CASE("chunk set agrees with std::set under random operations")
{
	Rng r(11);
	ChunkSet s;
	std::set<ChunkIndex> ref;
	for (int step = 0; step < 20000; ++step) {
		auto op = r.below(10);
		ChunkIndex i = static_cast<ChunkIndex>(r.below(700));
		if (op < 5) CHECK(s.insert(i) == ref.insert(i).second);
		else if (op < 8) CHECK(s.erase(i) == (ref.erase(i) > 0));
		else if (op == 8) {
			s.erase_below(i);
			ref.erase(ref.begin(), ref.lower_bound(i));
		}
		else {
			ChunkSet other;
			for (int k = 0; k < 40; ++k) other.insert(static_cast<ChunkIndex>(r.below(700)));
			ChunkIndex want = no_chunk;
			for (auto it = ref.rbegin(); it != ref.rend(); ++it)
				if (!other.contains(*it)) {
					want = *it;
					break;
				}
			CHECK(s.max_not_in(other) == want);
		}
		REQUIRE(s.size() == ref.size());
		CHECK(s.max() == (ref.empty() ? no_chunk : *ref.rbegin()));
		CHECK(s.min() == (ref.empty() ? no_chunk : *ref.begin()));
	}
	CHECK(s.to_vector() == std::vector<ChunkIndex>(ref.begin(), ref.end()));
}

TEST_CASE("buffer delivery classes and eviction")
{
	ChunkBuffer b(3);
	CHECK(b.deliver(7).kind == Delivery::fresh);
	CHECK(b.deliver(7).kind == Delivery::duplicate);
	CHECK(b.deliver(9).kind == Delivery::fresh);
	CHECK(b.deliver(8).kind == Delivery::fresh);
	auto r = b.deliver(10);
	CHECK(r.kind == Delivery::fresh);
	CHECK(r.evicted == 7);
	CHECK(b.held() == ChunkSet{8, 9, 10});
	// an evicted chunk delivered again is still a duplicate
	CHECK(b.deliver(7).kind == Delivery::duplicate);

	b.expire_below(10);
	CHECK(b.held() == ChunkSet{10});
	CHECK(b.deliver(5).kind == Delivery::late);
	CHECK(b.deliver(5).kind == Delivery::duplicate);
	CHECK(b.latest() == 10);

	auto map = b.snapshot(4, 1.5);
	CHECK(map.owner == 4);
	CHECK(map.window == ChunkSet{10});
}
