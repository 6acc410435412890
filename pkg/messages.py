"""Diagnostic text management for mixv.

Every user-facing violation or error string is a template here, so the wording of
validators, guards and the CLI stays consistent.
"""

# All diagnostic strings (English only)
TEXTS = {
    # Mixture validation
    'weights_count': "mixture has {weights} weights but {components} components",
    'weights_sum': "weights sum to {total}",
    'weight_range': "weight {index} is {value}, outside [0, 1]",
    'component_rows': "component {component} has {rows} rows, expected n = {n}",
    'component_alphabet': "component {component} uses a different alphabet",
    'row_width': "component {component} row {row} has {width} entries, expected |Σ| = {size}",
    'row_sum_component': "component {component} row {row} sums to {total}",
    'entry_negative': "component {component} row {row} entry {entry} is negative ({value})",
    'entry_above_one': "component {component} row {row} entry {entry} exceeds 1 ({value})",
    'empty_mixture': "mixture has no components",
    'negative_n': "coordinate count n = {n} is negative",

    # Ising validation
    'spin_count': "spin count n = {n} must be at least 1",
    'field_count': "model has {fields} fields but n = {n}",
    'pair_range': "pair ({i}, {j}) is out of range for n = {n}",
    'pair_self': "pair ({i}, {i}) is a self-pair",
    'pair_order': "pair ({i}, {j}) must satisfy i < j",
    'pair_duplicate': "pair ({i}, {j}) appears more than once",
    'not_finite': "{what} is not finite ({value})",

    # Input errors
    'bad_rational': "cannot parse rational {text!r}",
    'zero_denominator': "rational {text!r} has a zero denominator",
    'float_in_exact': "floating point value {value!r} is not allowed in exact arithmetic",
    'dimension_mismatch': "vector {index} has dimension {found}, expected {expected}",
    'unknown_symbol': "symbol {symbol!r} is not in the alphabet {alphabet}",
    'prefix_length': "prefix length {length} is outside 1..{n}",
    'alphabet_duplicate': "alphabet symbols must be distinct, got {symbols}",
    'alphabet_empty': "alphabet must contain at least one symbol",
    'alphabet_mismatch': "mixtures use different alphabets: {left} vs {right}",
    'length_mismatch': "mixtures have different coordinate counts: {left} vs {right}",
    'invalid_mixture': "invalid mixture {label}: {violations}",
    'invalid_model': "invalid Ising model: {violations}",
    'spin_vector': "spin vector must have length {n} with entries ±1, got {x}",
    'spin_index': "spin index {k} is outside 0..{last}",
    'spin_sign': "spin value must be +1 or -1, got {s}",
    'model_shape': "models differ in spin count: {left} vs {right}",
    'too_few_spins': "operation needs at least {minimum} spins, model has {n}",
    'point_mass_total': "probability table sums to {total}, expected 1",
    'point_mass_negative': "probability table has a negative entry at {point}",
    'point_mass_shape': "probability table has {found} entries, expected |Σ|^n = {expected}",
    'perturb_infeasible': "no entry of the mixture can be shifted by {magnitude} and stay in [0, 1]",
    'parameter': "invalid parameter {name}: {reason}",
    'file_unreadable': "cannot read {path}: {reason}",

    # Guards and numerics
    'enum_guard': "{guard} enumeration needs {size} configurations, guard allows {limit}",
    'enum_override': "MIXV_MAX_ENUM={limit} overrides the {guard} guard (default {default})",
    'gadget_delta': "gadget delta must exceed 1, got {delta}",
    'tv_unresolvable': ("TV estimate {value:.6g} is below the resolution {resolution:.3g} of binary64 "
                        "enumeration over {size} configurations at eps={eps}"),
    'gadget_infeasible': ("eps={eps} requires |h0| >= {h0:.6g} and delta >= {delta:.6g}, "
                          "beyond the supported magnitude {limit:.6g}"),
    'bound_vacuous': "error bound {bound:.6g} is not informative (>= 1)",
    'oracle_nonpositive': "marginal oracle returned a non-positive estimate {value!r} at step {step}",
    'oracle_failed': "oracle {oracle} failed: {reason}",
    'witness_unverified': "witness at depth {depth} {witness} failed re-verification",
    'brute_mismatch': "brute-force verdict {brute} disagrees with basis verdict {basis}",
}


def get_text(key: str) -> str:
    """
    Get diagnostic text for a given key.

    Args:
        key: The text key

    Returns:
        The template text, or the key itself if not found
    """
    return TEXTS.get(key, key)


def format_text(key: str, **kwargs) -> str:
    """
    Get diagnostic text and format it with provided arguments.

    Args:
        key: The text key
        **kwargs: Arguments to format the text with

    Returns:
        The formatted text
    """
    text = get_text(key)
    try:
        return text.format(**kwargs)
    except (KeyError, IndexError):
        return text
