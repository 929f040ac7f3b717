# **************************************************************************
# *
# * Authors:     degenflow developers
# *
# * This program is free software; you can redistribute it and/or modify
# * it under the terms of the GNU General Public License as published by
# * the Free Software Foundation; either version 3 of the License, or
# * (at your option) any later version.
# *
# * This program is distributed in the hope that it will be useful,
# * but WITHOUT ANY WARRANTY; without even the implied warranty of
# * MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# * GNU General Public License for more details.
# *
# * You should have received a copy of the GNU General Public License
# * along with this program; if not, write to the Free Software
# * Foundation, Inc., 59 Temple Place, Suite 330, Boston, MA
# * 02111-1307  USA
# *
# **************************************************************************

_bibtexStr = """
@Article{Beckmann1952,
   Author="Beckmann, M.",
   Title="{A continuous model of transportation}",
   Journal="Econometrica",
   Year="1952",
   Volume="20",
   Pages="643-660",
}

@Article{Wardrop1952,
   Author="Wardrop, J. G.",
   Title="{Some theoretical aspects of road traffic research}",
   Journal="Proc. Inst. Civ. Eng.",
   Year="1952",
   Volume="2",
   Pages="325-378",
}

@Article{DeGiorgi1957,
   Author="De Giorgi, E.",
   Title="{Sulla differenziabilita e l'analiticita delle estremali degli integrali multipli regolari}",
   Journal="Mem. Accad. Sci. Torino",
   Year="1957",
   Volume="3",
   Pages="25-43",
}

@Article{LionsMercier1979,
   Author="Lions, P.-L. and Mercier, B.",
   Title="{Splitting algorithms for the sum of two nonlinear operators}",
   Journal="SIAM J. Numer. Anal.",
   Year="1979",
   Volume="16",
   Number="6",
   Pages="964-979",
}

@Article{Sethian1996,
   Author="Sethian, J. A.",
   Title="{A fast marching level set method for monotonically advancing fronts}",
   Journal="Proc. Natl. Acad. Sci. USA",
   Year="1996",
   Volume="93",
   Number="4",
   Pages="1591-1595",
}
"""
