from .symbol_model import SymbolModel, TableSymbolModel, GaussianSymbolModel, SymbolTables, PRECISION, TOTAL
from .range_coder import RangeEncoder, RangeDecoder, range_encode, range_decode
