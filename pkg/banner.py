def show_banner():
    banner = r"""

    ▄▄▌ ▐ ▄▌▄▄▄ . ▄· ▄▌▄▄▌  ▄▄▄▄▄▄▄▄▄ .▐▄▄▄▪   ▄▄▄·  ▄▄·
    ██· █▌▐█▀▄.▀·▐█▪██▌██•  •██  ▀▄.▀·  ·██ ██ ▐█ ▀█ ▐█ ▌▪
    ██▪▐█▐▐▌▐▀▀▪▄▐█▌▐█▪██▪   ▐█.▪▐▀▀▪▄▪▄ ██ ▐█·▄█▀▀█ ██ ▄▄
    ▐█▌██▐█▌▐█▄▄▌ ▐█▀·.▐█▌▐▌ ▐█▌·▐█▄▄▌▐▌▐█▌▐█▌▐█ ▪▐▌▐███▌
     ▀▀▀▀ ▀▪ ▀▀▀   ▀ • .▀▀▀  ▀▀▀  ▀▀▀  ▀▀▀•▀▀▀ ▀  ▀ ·▀▀▀

       ══ Dirac 系统 Weyl 函数正反问题 ══
"""
    print(banner)
