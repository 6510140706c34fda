#pragma once

// Random peer graph G(n+1, p) (the source is one extra vertex wired by the
// same edge process) with a constant round-trip time on every link.

#include <chunksim/errors.hpp>
#include <chunksim/model.hpp>
#include <chunksim/rng.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace chunksim {

struct Link
{
	PeerId peer;
	double rtt; // seconds
};

struct Edge
{
	PeerId a;
	PeerId b;
	double rtt;
};

class Overlay
{
public:
	Overlay() = default;
	explicit Overlay(int peers)
		: m_peers(peers)
		, m_adj(static_cast<std::size_t>(peers) + 1)
	{}

	// number of non-source peers; peer ids are 0..n-1
	int peers() const { return m_peers; }
	int vertices() const { return m_peers + 1; }
	PeerId source() const { return m_peers; }

	std::vector<Link> const& links(PeerId v) const { return m_adj[static_cast<std::size_t>(v)]; }
	std::size_t degree(PeerId v) const { return links(v).size(); }

	bool adjacent(PeerId a, PeerId b) const { return find(a, b) != nullptr; }

	double rtt(PeerId a, PeerId b) const
	{
		Link const* l = find(a, b);
		return l ? l->rtt : -1.0;
	}

	std::size_t edge_count() const { return m_edges; }

	// each undirected edge once, a < b, in lexicographic order
	std::vector<Edge> edges() const
	{
		std::vector<Edge> out;
		out.reserve(m_edges);
		for (PeerId a = 0; a < vertices(); ++a)
			for (auto const& l : links(a))
				if (a < l.peer) out.push_back({a, l.peer, l.rtt});
		return out;
	}

	// edges must be added in increasing (a, b) order to keep lists sorted
	void add_edge(PeerId a, PeerId b, double rtt = 0.0)
	{
		m_adj[static_cast<std::size_t>(a)].push_back({b, rtt});
		m_adj[static_cast<std::size_t>(b)].push_back({a, rtt});
		++m_edges;
	}

	void set_rtt(PeerId a, PeerId b, double rtt)
	{
		const_cast<Link*>(find(a, b))->rtt = rtt;
		const_cast<Link*>(find(b, a))->rtt = rtt;
	}

	// peers without a path from the source
	int unreachable_from_source() const
	{
		std::vector<char> seen(static_cast<std::size_t>(vertices()), 0);
		std::vector<PeerId> stack{source()};
		seen[static_cast<std::size_t>(source())] = 1;
		int reached = 0;
		while (!stack.empty()) {
			PeerId v = stack.back();
			stack.pop_back();
			for (auto const& l : links(v)) {
				auto& s = seen[static_cast<std::size_t>(l.peer)];
				if (s) continue;
				s = 1;
				++reached;
				stack.push_back(l.peer);
			}
		}
		return m_peers - reached;
	}

private:
	Link const* find(PeerId a, PeerId b) const
	{
		auto const& l = links(a);
		auto it = std::lower_bound(l.begin(), l.end(), b,
			[](Link const& x, PeerId id) { return x.peer < id; });
		return (it != l.end() && it->peer == b) ? &*it : nullptr;
	}

	int m_peers = 0;
	std::vector<std::vector<Link>> m_adj;
	std::size_t m_edges = 0;
};

// Every unordered pair among the n peers and the source becomes an edge
// independently with probability p. No connectivity check.
inline Overlay generate_graph(int n, double p, Rng& rng)
{
	Overlay g(n);
	int const v = g.vertices();
	// Adjacency lists stay sorted because pairs are visited in (a, b) order
	// and every vertex receives its neighbours in increasing order.
	for (PeerId a = 0; a < v; ++a)
		for (PeerId b = a + 1; b < v; ++b)
			if (rng.bernoulli(p)) g.add_edge(a, b);
	return g;
}

inline Overlay generate_overlay(int n, double p, Rng& rng)
{
	Overlay g = generate_graph(n, p, rng);
	if (int missing = g.unreachable_from_source(); missing > 0)
		throw SourceUnreachable(missing);
	return g;
}

// Latency matrix file: one "i j rtt_ms" triple per line; blank lines and
// lines starting with '#' are ignored. Returns the RTTs in seconds.
inline std::vector<double> load_latency_matrix(std::string const& path)
{
	std::ifstream in(path);
	if (!in) throw BadMatrixFile("cannot open latency matrix '" + path + "'");
	std::vector<double> rtts;
	std::string line;
	std::size_t line_no = 0;
	while (std::getline(in, line)) {
		++line_no;
		auto const first = line.find_first_not_of(" \t\r");
		if (first == std::string::npos || line[first] == '#') continue;
		std::istringstream fields(line);
		long long i = 0;
		long long j = 0;
		double ms = 0.0;
		std::string extra;
		if (!(fields >> i >> j >> ms) || (fields >> extra))
			throw BadMatrixFile(path + ":" + std::to_string(line_no) + ": expected 'i j rtt_ms'");
		if (!(ms > 0.0) || !std::isfinite(ms))
			throw BadMatrixFile(path + ":" + std::to_string(line_no) + ": rtt must be positive");
		rtts.push_back(ms * 1e-3);
	}
	if (rtts.empty()) throw BadMatrixFile("latency matrix '" + path + "' has no entries");
	return rtts;
}

// Draws an RTT for every edge, in canonical edge order, then multiplies by
// `scale`. Draws do not depend on `scale`, so scaled overlays stay paired.
inline void assign_latencies(Overlay& g, LatencyModel const& model, double scale, Rng& rng)
{
	std::vector<double> matrix;
	if (auto const* m = std::get_if<MatrixLatency>(&model)) matrix = load_latency_matrix(m->path);

	for (auto const& e : g.edges()) {
		double rtt = std::visit([&](auto const& m) -> double {
			using T = std::decay_t<decltype(m)>;
			if constexpr (std::is_same_v<T, ConstantLatency>) return m.rtt;
			else if constexpr (std::is_same_v<T, MatrixLatency>)
				return matrix[rng.below(matrix.size())] * m.scale;
			else return rng.lognormal(m.median, m.sigma);
		}, model);
		g.set_rtt(e.a, e.b, rtt * scale);
	}
}

inline double lower_median(std::vector<double> values)
{
	if (values.empty()) return 0.0;
	auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
	std::nth_element(values.begin(), mid, values.end());
	return *mid;
}

inline double median_rtt(Overlay const& g)
{
	std::vector<double> rtts;
	rtts.reserve(g.edge_count());
	for (auto const& e : g.edges()) rtts.push_back(e.rtt);
	return lower_median(std::move(rtts));
}

// Builds the overlay for a run: regenerates with the next graph sub-seed
// while some peer is unreachable from the source (at most `attempts` tries),
// then assigns latencies from their own sub-stream.
inline Overlay build_overlay(SimConfig const& config, int attempts = 10)
{
	for (int attempt = 0;; ++attempt) {
		Rng graph_rng(config.seed, "graph", static_cast<std::uint64_t>(attempt));
		try {
			Overlay g = generate_overlay(config.n, config.edge_prob, graph_rng);
			Rng latency_rng(config.seed, "latency");
			assign_latencies(g, config.latency, config.latency_scale, latency_rng);
			return g;
		}
		catch (SourceUnreachable const&) {
			if (attempt + 1 >= attempts) throw;
		}
	}
}

} // namespace chunksim
