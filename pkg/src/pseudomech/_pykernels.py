"""Pure-Python term kernels.

Monomials are packed into a single non-negative int: the low ``n_odd`` bits
hold the Grassmann mask (bit k set means odd generator k is present), and
above them each even variable owns a fixed-width exponent field whose top
bit is a guard that must stay clear.
"""


def _swaps(ma, mb):
    # transpositions needed to sort (factors of ma)(factors of mb) ascending
    s = 0
    while mb:
        low = mb & -mb
        s += (ma & ~((low << 1) - 1)).bit_count()
        mb ^= low
    return s


def mul_terms(a, b, odd_mask, guard, prune):
    out = {}
    get = out.get
    bitems = list(b.items())
    for ka, ca in a.items():
        ma = ka & odd_mask
        for kb, cb in bitems:
            mb = kb & odd_mask
            if ma & mb:
                continue
            k = ka + kb
            if k & guard:
                raise OverflowError("even exponent exceeds packed field width")
            v = ca * cb
            if _swaps(ma, mb) & 1:
                v = -v
            out[k] = get(k, 0j) + v
    return {k: v for k, v in out.items() if abs(v) >= prune}


def add_terms(a, b, scale, prune):
    out = dict(a)
    get = out.get
    for k, v in b.items():
        out[k] = get(k, 0j) + scale * v
    return {k: v for k, v in out.items() if abs(v) >= prune}


def deriv_even(terms, shift, width):
    field = (1 << width) - 1
    unit = 1 << shift
    out = {}
    for k, c in terms.items():
        e = (k >> shift) & field
        if e:
            out[k - unit] = c * e
    return out


def deriv_odd(terms, bit, left, odd_mask):
    unit = 1 << bit
    out = {}
    for k, c in terms.items():
        if not k & unit:
            continue
        m = k & odd_mask
        if left:
            n = (m & (unit - 1)).bit_count()
        else:
            n = (m >> (bit + 1)).bit_count()
        out[k - unit] = -c if n & 1 else c
    return out
