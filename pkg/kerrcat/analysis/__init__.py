from kerrcat.analysis.catfit import CatFit, fit_cat
from kerrcat.analysis.spectrum import ObservableSplit, SpectrumReport, observable_split, spectral_decompose
from kerrcat.analysis.wigner import DisplacementCache, GridSpec, WignerGrid, wigner_numeric

__all__ = [
    'CatFit', 'fit_cat', 'ObservableSplit', 'SpectrumReport', 'observable_split', 'spectral_decompose',
    'DisplacementCache', 'GridSpec', 'WignerGrid', 'wigner_numeric',
]
