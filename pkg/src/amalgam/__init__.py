"""Amalgamation of finite structures on the union of their domains.

Subpackages and modules: ``structures`` (signatures, structures, morphisms),
``dsl`` and ``logic`` (theories and model checking), ``construct`` and
``linear`` (constructive amalgams), ``search`` (exhaustive decisions),
``algebraize`` (relations as operations), ``fraisse`` (chain growth) and
``corpus`` (curated examples).
"""

__version__ = "0.1.0"
