#pragma once

#include <chunksim/model.hpp>

#include <algorithm>
#include <bit>
#include <cassert>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace chunksim {

// Set of chunk indices stored as a bitmap over [base, base + 64 * words).
// The base is kept 64-aligned so that two sets can be compared word by word.
class ChunkSet
{
public:
	ChunkSet() = default;
	ChunkSet(std::initializer_list<ChunkIndex> indices)
	{
		for (auto i : indices) insert(i);
	}

	bool contains(ChunkIndex i) const
	{
		if (i < m_base) return false;
		auto const w = static_cast<std::size_t>((i - m_base) >> 6);
		if (w >= m_words.size()) return false;
		return (m_words[w] >> ((i - m_base) & 63)) & 1U;
	}

	// returns false if already present
	bool insert(ChunkIndex i)
	{
		assert(i >= 0);
		ChunkIndex const aligned = i & ~ChunkIndex(63);
		if (m_words.empty()) m_base = aligned;
		else if (aligned < m_base) {
			m_words.insert(m_words.begin(), static_cast<std::size_t>((m_base - aligned) >> 6), 0);
			m_base = aligned;
		}
		auto const w = static_cast<std::size_t>((i - m_base) >> 6);
		if (w >= m_words.size()) m_words.resize(w + 1, 0);
		std::uint64_t const bit = std::uint64_t(1) << ((i - m_base) & 63);
		if (m_words[w] & bit) return false;
		m_words[w] |= bit;
		++m_size;
		return true;
	}

	bool erase(ChunkIndex i)
	{
		if (!contains(i)) return false;
		auto const w = static_cast<std::size_t>((i - m_base) >> 6);
		m_words[w] &= ~(std::uint64_t(1) << ((i - m_base) & 63));
		--m_size;
		trim();
		return true;
	}

	// removes every index < lo
	void erase_below(ChunkIndex lo)
	{
		if (m_words.empty() || lo <= m_base) return;
		ChunkIndex const aligned = lo & ~ChunkIndex(63);
		auto const drop = std::min(m_words.size(),
			static_cast<std::size_t>(std::max<ChunkIndex>(0, (aligned - m_base) >> 6)));
		for (std::size_t w = 0; w < drop; ++w) m_size -= std::popcount(m_words[w]);
		m_words.erase(m_words.begin(), m_words.begin() + static_cast<std::ptrdiff_t>(drop));
		m_base += static_cast<ChunkIndex>(drop) << 6;
		if (!m_words.empty() && lo > m_base) {
			std::uint64_t const keep = ~std::uint64_t(0) << (lo - m_base);
			m_size -= std::popcount(m_words[0] & ~keep);
			m_words[0] &= keep;
		}
		trim();
	}

	std::size_t size() const { return m_size; }
	bool empty() const { return m_size == 0; }

	ChunkIndex max() const
	{
		for (std::size_t w = m_words.size(); w-- > 0;)
			if (m_words[w]) return m_base + static_cast<ChunkIndex>(w << 6) + 63 - std::countl_zero(m_words[w]);
		return no_chunk;
	}

	ChunkIndex min() const
	{
		for (std::size_t w = 0; w < m_words.size(); ++w)
			if (m_words[w]) return m_base + static_cast<ChunkIndex>(w << 6) + std::countr_zero(m_words[w]);
		return no_chunk;
	}

	// largest index in *this that is not in other
	ChunkIndex max_not_in(ChunkSet const& other) const
	{
		for (std::size_t w = m_words.size(); w-- > 0;) {
			ChunkIndex const start = m_base + static_cast<ChunkIndex>(w << 6);
			std::uint64_t const bits = m_words[w] & ~other.word_at(start);
			if (bits) return start + 63 - std::countl_zero(bits);
		}
		return no_chunk;
	}

	void merge(ChunkSet const& other)
	{
		other.for_each([this](ChunkIndex i) { insert(i); });
	}

	template <typename F>
	void for_each(F&& f) const
	{
		for (std::size_t w = 0; w < m_words.size(); ++w) {
			std::uint64_t bits = m_words[w];
			while (bits) {
				int const b = std::countr_zero(bits);
				f(m_base + static_cast<ChunkIndex>(w << 6) + b);
				bits &= bits - 1;
			}
		}
	}

	std::vector<ChunkIndex> to_vector() const
	{
		std::vector<ChunkIndex> out;
		out.reserve(m_size);
		for_each([&](ChunkIndex i) { out.push_back(i); });
		return out;
	}

	bool operator==(ChunkSet const& o) const { return to_vector() == o.to_vector(); }

private:
	// 64 bits starting at an aligned absolute index
	std::uint64_t word_at(ChunkIndex aligned_start) const
	{
		if (aligned_start < m_base) return 0;
		auto const w = static_cast<std::size_t>((aligned_start - m_base) >> 6);
		return w < m_words.size() ? m_words[w] : 0;
	}

	void trim()
	{
		while (!m_words.empty() && m_words.back() == 0) m_words.pop_back();
		std::size_t lead = 0;
		while (lead < m_words.size() && m_words[lead] == 0) ++lead;
		if (lead) {
			m_words.erase(m_words.begin(), m_words.begin() + static_cast<std::ptrdiff_t>(lead));
			m_base += static_cast<ChunkIndex>(lead) << 6;
		}
		if (m_words.empty()) m_base = 0;
	}

	ChunkIndex m_base = 0;
	std::vector<std::uint64_t> m_words;
	std::size_t m_size = 0;
};

// What a peer reports about its buffer when probed.
struct BufferMap
{
	PeerId owner = -1;
	double snapshot_time = 0.0;
	ChunkSet window;
};

enum class Delivery { fresh, duplicate, late };

struct DeliveryResult
{
	Delivery kind;
	ChunkIndex evicted = no_chunk;
};

// A peer's playout buffer: at most `capacity` chunks, none older than the
// sliding lower bound. Also remembers everything ever received so that a
// re-delivery of an evicted chunk is still recognised as a duplicate.
class ChunkBuffer
{
public:
	explicit ChunkBuffer(int capacity = 1) : m_capacity(capacity) {}

	int capacity() const { return m_capacity; }
	ChunkSet const& held() const { return m_held; }
	std::size_t size() const { return m_held.size(); }
	bool empty() const { return m_held.empty(); }
	bool holds(ChunkIndex i) const { return m_held.contains(i); }
	bool ever_received(ChunkIndex i) const { return m_ever.contains(i); }
	ChunkIndex latest() const { return m_held.max(); }
	ChunkIndex lower_bound() const { return m_lower; }

	// Chunks below lo are out of the playout window and dropped.
	void expire_below(ChunkIndex lo)
	{
		if (lo <= m_lower) return;
		m_lower = lo;
		m_held.erase_below(lo);
	}

	DeliveryResult deliver(ChunkIndex i)
	{
		if (m_ever.contains(i)) return {Delivery::duplicate};
		m_ever.insert(i);
		if (i < m_lower) return {Delivery::late};
		m_held.insert(i);
		DeliveryResult r{Delivery::fresh};
		if (m_held.size() > static_cast<std::size_t>(m_capacity)) {
			r.evicted = m_held.min();
			m_held.erase(r.evicted);
		}
		return r;
	}

	BufferMap snapshot(PeerId owner, double now) const
	{
		return {owner, now, m_held};
	}

private:
	int m_capacity;
	ChunkIndex m_lower = 0;
	ChunkSet m_held;
	ChunkSet m_ever;
};

} // namespace chunksim
