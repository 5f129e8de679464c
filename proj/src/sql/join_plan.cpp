// SPDX-License-Identifier: Apache-2.0
#include "trajsql/sql/join_plan.h"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>

#include "trajsql/core/error.h"

namespace trajsql::sql {

namespace {

struct Adjacent {
  std::string table;
  std::size_t edge;
};

}  // namespace

JoinPlan plan_joins(const std::set<std::string>& requested, const DatabaseInput& d) {
  if (requested.empty()) throw JoinPathNotFound("no tables to join");
  std::set<std::string> targets;
  for (const auto& name : requested) {
    const TableDef* t = d.find_table(name);
    if (!t) throw SchemaMismatch("table `" + name + "` is not in database `" + d.name + "`");
    targets.insert(t->name);
  }

  std::vector<JoinEdge> edges;
  std::map<std::string, std::vector<Adjacent>> graph;
  for (const auto& t : d.tables) {
    for (const auto& fk : t.foreign_keys) {
      if (fk.to_table == t.name) continue;  // self references never join distinct tables
      const std::size_t id = edges.size();
      edges.push_back({{t.name, fk.from_column}, {fk.to_table, fk.to_column}});
      graph[t.name].push_back({fk.to_table, id});
      graph[fk.to_table].push_back({t.name, id});
    }
  }

  JoinPlan plan;
  plan.tables.push_back(*targets.begin());
  std::set<std::string> in_tree{plan.tables[0]};

  while (true) {
    std::vector<std::string> remaining;
    for (const auto& t : targets) {
      if (!in_tree.count(t)) remaining.push_back(t);
    }
    if (remaining.empty()) break;

    // Multi-source BFS from the tree, counting shortest paths (capped at 2).
    constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
    std::map<std::string, std::size_t> dist;
    std::map<std::string, int> count;
    std::map<std::string, Adjacent> parent;
    std::deque<std::string> queue;
    for (const auto& t : in_tree) {
      dist[t] = 0;
      count[t] = 1;
      queue.push_back(t);
    }
    while (!queue.empty()) {
      const std::string u = queue.front();
      queue.pop_front();
      for (const auto& adj : graph[u]) {
        const auto it = dist.find(adj.table);
        const std::size_t du = dist[u];
        if (it == dist.end()) {
          dist[adj.table] = du + 1;
          count[adj.table] = count[u];
          parent[adj.table] = {u, adj.edge};
          queue.push_back(adj.table);
        } else if (it->second == du + 1) {
          count[adj.table] = std::min(2, count[adj.table] + count[u]);
        }
      }
    }

    std::string next;
    std::size_t best = kInf;
    for (const auto& t : remaining) {
      const auto it = dist.find(t);
      if (it != dist.end() && it->second < best) {
        best = it->second;
        next = t;
      }
    }
    if (next.empty()) {
      throw JoinPathNotFound("no foreign-key path connects `" + remaining.front() + "` to `" +
                             plan.tables[0] + "`");
    }
    if (count[next] > 1) {
      throw JoinPathNotFound("more than one shortest foreign-key path reaches `" + next + "`");
    }
    std::vector<std::pair<std::string, std::size_t>> path;
    for (std::string cur = next; !in_tree.count(cur); cur = parent[cur].table) {
      path.emplace_back(cur, parent[cur].edge);
    }
    std::reverse(path.begin(), path.end());
    for (const auto& [table, edge] : path) {
      plan.tables.push_back(table);
      plan.edges.push_back(edges[edge]);
      in_tree.insert(table);
    }
  }
  return plan;
}

}  // namespace trajsql::sql
