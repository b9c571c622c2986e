"""Hypothesis strategies for random valid architectures and values."""

from hypothesis import strategies as st

from failsec.model import Architecture, ComponentKind, Ctor, Endpoint, IfEq, Instance, Net, NullLit, PortRef
from failsec.values import NULL, Atom, Term

CONSTRUCTORS = ["enc", "h", "mix"]
PORT_POOL = ["a", "b", "c", "key", "msg", "x"]
INSTANCE_POOL = ["cmp", "enc1", "enc2", "u", "v", "w", "z9", "_t"]


@st.composite
def exprs(draw, inputs, depth=3):
    """Random behavior expression over ``inputs``, at most ``depth`` deep."""
    choice = draw(st.integers(0, 9 if depth > 0 else 4))
    if choice <= 3:
        return PortRef(draw(st.sampled_from(inputs)))
    if choice == 4:
        return NullLit()
    if choice <= 7:
        n = draw(st.integers(1, 3))
        return Ctor(draw(st.sampled_from(CONSTRUCTORS)),
                    tuple(draw(exprs(inputs, depth - 1)) for _ in range(n)))
    return IfEq(*(draw(exprs(inputs, depth - 1)) for _ in range(4)))


@st.composite
def kinds(draw, name, max_inputs=3, max_outputs=2):
    ports = draw(st.lists(st.sampled_from(PORT_POOL), min_size=2,
                          max_size=max_inputs + max_outputs, unique=True))
    n_in = draw(st.integers(1, min(max_inputs, len(ports) - 1)))
    inputs = tuple(ports[:n_in])
    outputs = tuple(ports[n_in:n_in + max_outputs])
    behavior = tuple((o, draw(exprs(inputs))) for o in outputs)
    return ComponentKind(name, inputs, outputs, behavior)


@st.composite
def architectures(draw, max_instances=6, max_inputs=3, max_outputs=2):
    """A random acyclic, fully connected architecture.

    Instances are wired in generation order (each input reads a product
    input or an earlier instance's output) and then declared in a shuffled
    order, so declaration order and dataflow order disagree.
    """
    product_inputs = draw(st.lists(st.sampled_from(["key", "msg", "iv", "k2"]),
                                   min_size=1, max_size=3, unique=True))
    product_outputs = draw(st.lists(st.sampled_from(["out", "o2", "tag"]),
                                    min_size=1, max_size=2, unique=True))
    m = draw(st.integers(1, max_instances))
    names = draw(st.lists(st.sampled_from(INSTANCE_POOL), min_size=m, max_size=m, unique=True))

    kind_list = []
    inst_kind = {}
    for i, name in enumerate(names):
        if kind_list and draw(st.booleans()):
            inst_kind[name] = draw(st.sampled_from(kind_list))
        else:
            k = draw(kinds(f"K{i}", max_inputs, max_outputs))
            kind_list.append(k)
            inst_kind[name] = k

    drivers = [Endpoint(None, p) for p in product_inputs]
    readers_of = {d.key: [] for d in drivers}
    for name in names:
        kind = inst_kind[name]
        for port in kind.inputs:
            src = draw(st.sampled_from(drivers))
            readers_of[src.key].append(Endpoint(name, port))
        for port in kind.outputs:
            ep = Endpoint(name, port)
            drivers.append(ep)
            readers_of[ep.key] = []
    for port in product_outputs:
        src = draw(st.sampled_from(drivers))
        readers_of[src.key].append(Endpoint(None, port))

    nets = [Net(d, tuple(readers_of[d.key])) for d in drivers if readers_of[d.key]]
    nets = draw(st.permutations(nets))
    declared = draw(st.permutations(names))
    return Architecture(
        "Random",
        tuple(product_inputs),
        tuple(product_outputs),
        tuple(kind_list),
        tuple(Instance(n, inst_kind[n].name) for n in declared),
        tuple(nets),
    )


def values(atoms=("key", "msg", "iv")):
    return st.recursive(
        st.one_of(st.sampled_from(atoms).map(Atom), st.just(NULL)),
        lambda children: st.builds(
            lambda c, args: Term(c, tuple(args)),
            st.sampled_from(CONSTRUCTORS),
            st.lists(children, min_size=1, max_size=3),
        ),
        max_leaves=10,
    )
