#include "haarscat/blossom.hpp"

#include <algorithm>
#include <limits>

#include "haarscat/common.hpp"

namespace haar {
namespace {

// Array-based layout: vertices are 0..n-1, non-trivial blossoms n..2n-1.
// Edge k has endpoints 2k and 2k+1; endpoint p belongs to vertex endpoint_[p]
// and p^1 is the opposite end of the same edge.
class BlossomSolver {
public:
    BlossomSolver(std::size_t n, std::span<const WeightedEdge> edges, bool max_cardinality)
        : n_(static_cast<int>(n)), max_cardinality_(max_cardinality) {
        edges_.assign(edges.begin(), edges.end());
        std::int64_t max_weight = 0;
        for (auto& e : edges_) {
            if (e.u >= n || e.v >= n) throw Error("max_weight_matching: endpoint out of range");
            if (e.u == e.v) throw Error("max_weight_matching: self-loop");
            if (e.weight >= (std::int64_t{1} << 60) || e.weight <= -(std::int64_t{1} << 60))
                throw Error("max_weight_matching: weight magnitude too large");
            // Doubling keeps every dual update integral.
            e.weight *= 2;
            max_weight = std::max(max_weight, e.weight);
        }
        const int m = static_cast<int>(edges_.size());
        endpoint_.resize(2 * m);
        neighbend_.assign(n_, {});
        for (int k = 0; k < m; ++k) {
            endpoint_[2 * k] = static_cast<int>(edges_[k].u);
            endpoint_[2 * k + 1] = static_cast<int>(edges_[k].v);
            neighbend_[edges_[k].u].push_back(2 * k + 1);
            neighbend_[edges_[k].v].push_back(2 * k);
        }
        mate_.assign(n_, -1);
        label_.assign(2 * n_, 0);
        labelend_.assign(2 * n_, -1);
        inblossom_.resize(n_);
        for (int v = 0; v < n_; ++v) inblossom_[v] = v;
        blossomparent_.assign(2 * n_, -1);
        blossomchilds_.assign(2 * n_, {});
        blossombase_.assign(2 * n_, -1);
        for (int v = 0; v < n_; ++v) blossombase_[v] = v;
        blossomendps_.assign(2 * n_, {});
        bestedge_.assign(2 * n_, -1);
        blossombestedges_.assign(2 * n_, {});
        has_bestedges_.assign(2 * n_, 0);
        for (int b = 2 * n_ - 1; b >= n_; --b) unused_.push_back(b);
        dualvar_.assign(2 * n_, 0);
        for (int v = 0; v < n_; ++v) dualvar_[v] = max_weight;
        allowedge_.assign(m, 0);
    }

    std::vector<int> solve() {
        if (edges_.empty()) return std::vector<int>(n_, -1);
        for (int stage = 0; stage < n_; ++stage) {
            std::fill(label_.begin(), label_.end(), 0);
            std::fill(bestedge_.begin(), bestedge_.end(), -1);
            for (int b = n_; b < 2 * n_; ++b) {
                blossombestedges_[b].clear();
                has_bestedges_[b] = 0;
            }
            std::fill(allowedge_.begin(), allowedge_.end(), 0);
            queue_.clear();

            for (int v = 0; v < n_; ++v)
                if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);

            bool augmented = false;
            while (true) {
                while (!queue_.empty() && !augmented) {
                    const int v = queue_.back();
                    queue_.pop_back();
                    for (const int p : neighbend_[v]) {
                        const int k = p / 2;
                        const int w = endpoint_[p];
                        if (inblossom_[v] == inblossom_[w]) continue;
                        std::int64_t kslack = 0;
                        if (!allowedge_[k]) {
                            kslack = slack(k);
                            if (kslack <= 0) allowedge_[k] = 1;
                        }
                        if (allowedge_[k]) {
                            if (label_[inblossom_[w]] == 0) {
                                assign_label(w, 2, p ^ 1);
                            } else if (label_[inblossom_[w]] == 1) {
                                const int base = scan_blossom(v, w);
                                if (base >= 0) {
                                    add_blossom(base, k);
                                } else {
                                    augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if (label_[w] == 0) {
                                label_[w] = 2;
                                labelend_[w] = p ^ 1;
                            }
                        } else if (label_[inblossom_[w]] == 1) {
                            const int b = inblossom_[v];
                            if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
                        } else if (label_[w] == 0) {
                            if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) bestedge_[w] = k;
                        }
                    }
                }
                if (augmented) break;

                int deltatype = -1;
                std::int64_t delta = 0;
                int deltaedge = -1;
                int deltablossom = -1;

                if (!max_cardinality_) {
                    deltatype = 1;
                    delta = *std::min_element(dualvar_.begin(), dualvar_.begin() + n_);
                }
                for (int v = 0; v < n_; ++v) {
                    if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
                        const std::int64_t d = slack(bestedge_[v]);
                        if (deltatype == -1 || d < delta) {
                            delta = d;
                            deltatype = 2;
                            deltaedge = bestedge_[v];
                        }
                    }
                }
                for (int b = 0; b < 2 * n_; ++b) {
                    if (blossomparent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
                        const std::int64_t ks = slack(bestedge_[b]);
                        const std::int64_t d = ks / 2;
                        if (deltatype == -1 || d < delta) {
                            delta = d;
                            deltatype = 3;
                            deltaedge = bestedge_[b];
                        }
                    }
                }
                for (int b = n_; b < 2 * n_; ++b) {
                    if (blossombase_[b] >= 0 && blossomparent_[b] == -1 && label_[b] == 2 &&
                        (deltatype == -1 || dualvar_[b] < delta)) {
                        delta = dualvar_[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if (deltatype == -1) {
                    // No further progress possible; only reachable in
                    // max-cardinality mode. Finish with a final dual update.
                    deltatype = 1;
                    delta = std::max<std::int64_t>(
                        0, *std::min_element(dualvar_.begin(), dualvar_.begin() + n_));
                }

                for (int v = 0; v < n_; ++v) {
                    const int l = label_[inblossom_[v]];
                    if (l == 1)
                        dualvar_[v] -= delta;
                    else if (l == 2)
                        dualvar_[v] += delta;
                }
                for (int b = n_; b < 2 * n_; ++b) {
                    if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
                        if (label_[b] == 1)
                            dualvar_[b] += delta;
                        else if (label_[b] == 2)
                            dualvar_[b] -= delta;
                    }
                }

                if (deltatype == 1) {
                    break;
                } else if (deltatype == 2) {
                    allowedge_[deltaedge] = 1;
                    int i = static_cast<int>(edges_[deltaedge].u);
                    int j = static_cast<int>(edges_[deltaedge].v);
                    if (label_[inblossom_[i]] == 0) std::swap(i, j);
                    queue_.push_back(i);
                } else if (deltatype == 3) {
                    allowedge_[deltaedge] = 1;
                    queue_.push_back(static_cast<int>(edges_[deltaedge].u));
                } else {
                    expand_blossom(deltablossom, false);
                }
            }

            if (!augmented) break;

            for (int b = n_; b < 2 * n_; ++b) {
                if (blossomparent_[b] == -1 && blossombase_[b] >= 0 && label_[b] == 1 &&
                    dualvar_[b] == 0)
                    expand_blossom(b, true);
            }
        }

        std::vector<int> result(n_, -1);
        for (int v = 0; v < n_; ++v)
            if (mate_[v] >= 0) result[v] = endpoint_[mate_[v]];
        return result;
    }

private:
    std::int64_t slack(int k) const {
        const auto& e = edges_[k];
        return dualvar_[e.u] + dualvar_[e.v] - 2 * e.weight;
    }

    void leaves(int b, std::vector<int>& out) const {
        if (b < n_) {
            out.push_back(b);
            return;
        }
        for (const int t : blossomchilds_[b]) leaves(t, out);
    }

    std::vector<int> leaves(int b) const {
        std::vector<int> out;
        leaves(b, out);
        return out;
    }

    void assign_label(int w, int t, int p) {
        const int b = inblossom_[w];
        label_[w] = label_[b] = t;
        labelend_[w] = labelend_[b] = p;
        bestedge_[w] = bestedge_[b] = -1;
        if (t == 1) {
            leaves(b, queue_);
        } else if (t == 2) {
            const int base = blossombase_[b];
            assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
        }
    }

    int scan_blossom(int v, int w) {
        std::vector<int> path;
        int base = -1;
        while (v != -1 || w != -1) {
            int b = inblossom_[v];
            if (label_[b] & 4) {
                base = blossombase_[b];
                break;
            }
            path.push_back(b);
            label_[b] = 5;
            if (labelend_[b] == -1) {
                v = -1;
            } else {
                v = endpoint_[labelend_[b]];
                b = inblossom_[v];
                v = endpoint_[labelend_[b]];
            }
            if (w != -1) std::swap(v, w);
        }
        for (const int b : path) label_[b] = 1;
        return base;
    }

    void add_blossom(int base, int k) {
        int v = static_cast<int>(edges_[k].u);
        int w = static_cast<int>(edges_[k].v);
        const int bb = inblossom_[base];
        int bv = inblossom_[v];
        int bw = inblossom_[w];
        const int b = unused_.back();
        unused_.pop_back();
        blossombase_[b] = base;
        blossomparent_[b] = -1;
        blossomparent_[bb] = b;
        auto& path = blossomchilds_[b];
        auto& endps = blossomendps_[b];
        path.clear();
        endps.clear();
        while (bv != bb) {
            blossomparent_[bv] = b;
            path.push_back(bv);
            endps.push_back(labelend_[bv]);
            v = endpoint_[labelend_[bv]];
            bv = inblossom_[v];
        }
        path.push_back(bb);
        std::reverse(path.begin(), path.end());
        std::reverse(endps.begin(), endps.end());
        endps.push_back(2 * k);
        while (bw != bb) {
            blossomparent_[bw] = b;
            path.push_back(bw);
            endps.push_back(labelend_[bw] ^ 1);
            w = endpoint_[labelend_[bw]];
            bw = inblossom_[w];
        }
        label_[b] = 1;
        labelend_[b] = labelend_[bb];
        dualvar_[b] = 0;
        for (const int leaf : leaves(b)) {
            if (label_[inblossom_[leaf]] == 2) queue_.push_back(leaf);
            inblossom_[leaf] = b;
        }

        std::vector<int> bestedgeto(2 * n_, -1);
        for (const int child : path) {
            std::vector<std::vector<int>> nblists;
            if (!has_bestedges_[child]) {
                for (const int leaf : leaves(child)) {
                    std::vector<int> ks;
                    ks.reserve(neighbend_[leaf].size());
                    for (const int p : neighbend_[leaf]) ks.push_back(p / 2);
                    nblists.push_back(std::move(ks));
                }
            } else {
                nblists.push_back(blossombestedges_[child]);
            }
            for (const auto& nblist : nblists) {
                for (const int kk : nblist) {
                    int i = static_cast<int>(edges_[kk].u);
                    int j = static_cast<int>(edges_[kk].v);
                    if (inblossom_[j] == b) std::swap(i, j);
                    const int bj = inblossom_[j];
                    if (bj != b && label_[bj] == 1 &&
                        (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj])))
                        bestedgeto[bj] = kk;
                }
            }
            blossombestedges_[child].clear();
            has_bestedges_[child] = 0;
            bestedge_[child] = -1;
        }
        blossombestedges_[b].clear();
        for (const int kk : bestedgeto)
            if (kk != -1) blossombestedges_[b].push_back(kk);
        has_bestedges_[b] = 1;
        bestedge_[b] = -1;
        for (const int kk : blossombestedges_[b])
            if (bestedge_[b] == -1 || slack(kk) < slack(bestedge_[b])) bestedge_[b] = kk;
    }

    void expand_blossom(int b, bool endstage) {
        for (const int s : std::vector<int>(blossomchilds_[b])) {
            blossomparent_[s] = -1;
            if (s < n_) {
                inblossom_[s] = s;
            } else if (endstage && dualvar_[s] == 0) {
                expand_blossom(s, endstage);
            } else {
                for (const int leaf : leaves(s)) inblossom_[leaf] = s;
            }
        }
        if (!endstage && label_[b] == 2) {
            auto& childs = blossomchilds_[b];
            auto& endps = blossomendps_[b];
            const int len = static_cast<int>(childs.size());
            const int entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
            int j = static_cast<int>(std::find(childs.begin(), childs.end(), entrychild) - childs.begin());
            int jstep, endptrick;
            if (j & 1) {
                j -= len;
                jstep = 1;
                endptrick = 0;
            } else {
                jstep = -1;
                endptrick = 1;
            }
            auto at = [len](const std::vector<int>& vec, int idx) {
                return vec[((idx % len) + len) % len];
            };
            int p = labelend_[b];
            while (j != 0) {
                label_[endpoint_[p ^ 1]] = 0;
                label_[endpoint_[at(endps, j - endptrick) ^ endptrick ^ 1]] = 0;
                assign_label(endpoint_[p ^ 1], 2, p);
                allowedge_[at(endps, j - endptrick) / 2] = 1;
                j += jstep;
                p = at(endps, j - endptrick) ^ endptrick;
                allowedge_[p / 2] = 1;
                j += jstep;
            }
            int bv = at(childs, j);
            label_[endpoint_[p ^ 1]] = label_[bv] = 2;
            labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
            bestedge_[bv] = -1;
            j += jstep;
            while (at(childs, j) != entrychild) {
                bv = at(childs, j);
                if (label_[bv] == 1) {
                    j += jstep;
                    continue;
                }
                int labelled = -1;
                for (const int leaf : leaves(bv)) {
                    if (label_[leaf] != 0) {
                        labelled = leaf;
                        break;
                    }
                }
                if (labelled >= 0) {
                    label_[labelled] = 0;
                    label_[endpoint_[mate_[blossombase_[bv]]]] = 0;
                    assign_label(labelled, 2, labelend_[labelled]);
                }
                j += jstep;
            }
        }
        label_[b] = labelend_[b] = -1;
        blossomchilds_[b].clear();
        blossomendps_[b].clear();
        blossombase_[b] = -1;
        blossombestedges_[b].clear();
        has_bestedges_[b] = 0;
        bestedge_[b] = -1;
        unused_.push_back(b);
    }

    void augment_blossom(int b, int v) {
        int t = v;
        while (blossomparent_[t] != b) t = blossomparent_[t];
        if (t >= n_) augment_blossom(t, v);
        auto& childs = blossomchilds_[b];
        auto& endps = blossomendps_[b];
        const int len = static_cast<int>(childs.size());
        auto at = [len](const std::vector<int>& vec, int idx) {
            return vec[((idx % len) + len) % len];
        };
        const int i = static_cast<int>(std::find(childs.begin(), childs.end(), t) - childs.begin());
        int j = i;
        int jstep, endptrick;
        if (i & 1) {
            j -= len;
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        while (j != 0) {
            j += jstep;
            t = at(childs, j);
            const int p = at(endps, j - endptrick) ^ endptrick;
            if (t >= n_) augment_blossom(t, endpoint_[p]);
            j += jstep;
            t = at(childs, j);
            if (t >= n_) augment_blossom(t, endpoint_[p ^ 1]);
            mate_[endpoint_[p]] = p ^ 1;
            mate_[endpoint_[p ^ 1]] = p;
        }
        std::rotate(childs.begin(), childs.begin() + i, childs.end());
        std::rotate(endps.begin(), endps.begin() + i, endps.end());
        blossombase_[b] = blossombase_[childs[0]];
    }

    void augment_matching(int k) {
        const int v = static_cast<int>(edges_[k].u);
        const int w = static_cast<int>(edges_[k].v);
        const int starts[2][2] = {{v, 2 * k + 1}, {w, 2 * k}};
        for (const auto& sp : starts) {
            int s = sp[0];
            int p = sp[1];
            while (true) {
                const int bs = inblossom_[s];
                if (bs >= n_) augment_blossom(bs, s);
                mate_[s] = p;
                if (labelend_[bs] == -1) break;
                const int t = endpoint_[labelend_[bs]];
                const int bt = inblossom_[t];
                s = endpoint_[labelend_[bt]];
                const int j = endpoint_[labelend_[bt] ^ 1];
                if (bt >= n_) augment_blossom(bt, j);
                mate_[j] = labelend_[bt];
                p = labelend_[bt] ^ 1;
            }
        }
    }

    int n_;
    bool max_cardinality_;
    std::vector<WeightedEdge> edges_;
    std::vector<int> endpoint_;
    std::vector<std::vector<int>> neighbend_;
    std::vector<int> mate_, label_, labelend_, inblossom_, blossomparent_, blossombase_, bestedge_,
        unused_, queue_;
    std::vector<std::vector<int>> blossomchilds_, blossomendps_, blossombestedges_;
    std::vector<char> has_bestedges_, allowedge_;
    std::vector<std::int64_t> dualvar_;
};

}  // namespace

std::vector<int> max_weight_matching(std::size_t vertex_count,
                                     std::span<const WeightedEdge> edges,
                                     bool max_cardinality) {
    if (vertex_count > static_cast<std::size_t>(std::numeric_limits<int>::max() / 4))
        throw Error("max_weight_matching: too many vertices");
    BlossomSolver solver(vertex_count, edges, max_cardinality);
    return solver.solve();
}

}  // namespace haar
