#pragma once

// Engine counters and their reduction to the (miss ratio, delay, overhead)
// triplet plus goodput and throughput.

#include <chunksim/chunk_set.hpp>
#include <chunksim/errors.hpp>
#include <chunksim/model.hpp>

#include <numeric>
#include <vector>

namespace chunksim {

struct PeerAccumulator
{
	std::vector<double> delays;  // measured chunks received in time
	ChunkSet in_time;            // measured chunks received in time
	std::int64_t duplicates = 0; // deliveries of an already received chunk
	std::int64_t late = 0;       // first deliveries after the chunk's horizon
	// bytes (Mb) whose transmission or arrival fell inside the window
	double control_sent = 0.0;
	double data_sent = 0.0;
	double duplicate_received = 0.0;
};

// Per-node counters for one run. Entries 0..n-1 are the peers, entry n is
// the source: it contributes sent bytes but is never a receiver.
struct Accumulators
{
	int n = 0;
	ChunkIndex first_measured = 0;
	ChunkIndex end_measured = 0;
	double t0 = 0.0; // creation of the first measured chunk
	double t1 = 0.0; // creation of the first chunk after the window
	double chunk_size = 0.0;
	std::vector<PeerAccumulator> nodes;

	static Accumulators for_config(SimConfig const& c)
	{
		Accumulators acc;
		acc.n = c.n;
		acc.first_measured = c.first_measured();
		acc.end_measured = c.end_measured();
		acc.t0 = c.creation_time(acc.first_measured);
		acc.t1 = c.creation_time(acc.end_measured);
		acc.chunk_size = c.chunk_size;
		acc.nodes.resize(static_cast<std::size_t>(c.n) + 1);
		return acc;
	}

	bool measured(ChunkIndex i) const { return i >= first_measured && i < end_measured; }
	bool in_window(double t) const { return t >= t0 && t < t1; }
	std::int64_t eligible() const { return std::int64_t(n) * (end_measured - first_measured); }

	std::int64_t delivered() const
	{
		std::int64_t total = 0;
		for (int i = 0; i < n; ++i) total += static_cast<std::int64_t>(nodes[static_cast<std::size_t>(i)].in_time.size());
		return total;
	}
};

// Measured chunks the peer did not receive by their horizon.
inline std::vector<ChunkIndex> missed_chunks(Accumulators const& acc, PeerId peer)
{
	std::vector<ChunkIndex> out;
	auto const& got = acc.nodes[static_cast<std::size_t>(peer)].in_time;
	for (ChunkIndex i = acc.first_measured; i < acc.end_measured; ++i)
		if (!got.contains(i)) out.push_back(i);
	return out;
}

inline MetricsReport finalize(Accumulators const& acc)
{
	double const span = acc.t1 - acc.t0;
	if (acc.end_measured <= acc.first_measured || !(span > 0.0) || acc.n <= 0)
		throw EmptyWindow("measurement window holds no chunk");

	MetricsReport r;
	r.chunks_eligible = acc.eligible();
	std::int64_t const delivered = acc.delivered();
	r.chunks_missed = r.chunks_eligible - delivered;
	r.miss_ratio = static_cast<double>(r.chunks_missed) / static_cast<double>(r.chunks_eligible);

	double delay_sum = 0.0;
	std::size_t delay_count = 0;
	double control = 0.0;
	double data = 0.0;
	double duplicate = 0.0;
	r.peer_mean_delay.reserve(static_cast<std::size_t>(acc.n));
	for (std::size_t i = 0; i < acc.nodes.size(); ++i) {
		auto const& p = acc.nodes[i];
		control += p.control_sent;
		data += p.data_sent;
		duplicate += p.duplicate_received;
		if (i >= static_cast<std::size_t>(acc.n)) continue;
		double const sum = std::accumulate(p.delays.begin(), p.delays.end(), 0.0);
		delay_sum += sum;
		delay_count += p.delays.size();
		r.peer_mean_delay.push_back(p.delays.empty() ? 0.0 : sum / static_cast<double>(p.delays.size()));
		r.late_deliveries += p.late;
		r.duplicate_deliveries += p.duplicates;
	}
	r.avg_delay = delay_count ? delay_sum / static_cast<double>(delay_count) : 0.0;

	double const norm = static_cast<double>(acc.n) * span;
	r.goodput = static_cast<double>(delivered) * acc.chunk_size / norm;
	r.throughput = (control + data) / norm;
	r.overhead = r.throughput - r.goodput;
	r.control_rate = control / norm;
	r.duplicate_data_rate = duplicate / norm;
	return r;
}

} // namespace chunksim
