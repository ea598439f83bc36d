import networkx as nx


class ReferenceGraph:
    """Directed reference DAG: an edge ref -> frame means frame predicts from ref."""

    def __init__(self):
        self.graph = nx.DiGraph()

    def add_frame(self, frame_index, **attrs):
        self.graph.add_node(frame_index, **attrs)

    def add_reference(self, ref_index, frame_index):
        self.graph.add_edge(ref_index, frame_index)

    def references(self, frame_index):
        return sorted(self.graph.predecessors(frame_index))

    def dependants(self, frame_index):
        return sorted(self.graph.successors(frame_index))

    def is_acyclic(self):
        return nx.is_directed_acyclic_graph(self.graph)

    def is_coding_order(self, order):
        """True when every frame's references appear before it in ``order``."""
        position = {f: i for i, f in enumerate(order)}
        if set(position) != set(self.graph.nodes) or len(position) != len(order):
            return False
        return all(position[u] < position[v] for u, v in self.graph.edges)

    def depth(self, frame_index):
        """Longest reference chain ending at frame_index (0 for intra frames)."""
        return nx.dag_longest_path_length(self.graph.subgraph(nx.ancestors(self.graph, frame_index) | {frame_index}))
